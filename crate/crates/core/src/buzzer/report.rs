use std::io::Write;

use super::{AccuracyCurve, BuzzError, TransferTable};

/// One row per curve: `model_id,dataset_id,granularity,<p1>,<p2>,...`.
/// All curves must share the same grid.
pub fn write_curves_csv(curves: &[AccuracyCurve], writer: impl Write) -> Result<(), BuzzError> {
    let Some(first) = curves.first() else {
        return Err(BuzzError::NoModels);
    };
    if let Some(c) = curves.iter().find(|c| c.positions != first.positions) {
        return Err(BuzzError::InvalidGrid(format!("curve for `{}` uses a different grid", c.model_id)));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["model_id".to_string(), "dataset_id".into(), "granularity".into()];
    header.extend(first.positions.iter().map(|p| p.to_string()));
    w.write_record(&header)?;
    for c in curves {
        let mut row = vec![c.model_id.clone(), c.dataset_id.clone(), c.granularity.as_str().to_string()];
        row.extend(c.accuracy.iter().map(|a| a.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Header `model,<set names>`, then one row per model.
pub fn write_transfer_csv(table: &TransferTable, writer: impl Write) -> Result<(), BuzzError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["model".to_string()];
    header.extend(table.sets.iter().cloned());
    w.write_record(&header)?;
    for (model, row) in table.models.iter().zip(&table.accuracy) {
        let mut record = vec![model.clone()];
        record.extend(row.iter().map(|a| a.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buzzer::Granularity;

    #[test]
    fn curves_csv_layout() {
        let curve = AccuracyCurve {
            model_id: "ir".into(),
            dataset_id: "test".into(),
            granularity: Granularity::Word,
            positions: vec![0.5, 1.0],
            accuracy: vec![0.25, 0.75],
            n_questions: 4,
        };
        let mut out = Vec::new();
        write_curves_csv(&[curve], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "model_id,dataset_id,granularity,0.5,1\nir,test,word,0.25,0.75\n");
    }

    #[test]
    fn transfer_csv_layout() {
        let t = TransferTable {
            models: vec!["ir".into(), "dan".into()],
            sets: vec!["regular".into(), "adversarial".into()],
            accuracy: vec![vec![1.0, 0.5], vec![0.75, 0.0]],
        };
        let mut out = Vec::new();
        write_transfer_csv(&t, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "model,regular,adversarial\nir,1,0.5\ndan,0.75,0\n");
    }
}
