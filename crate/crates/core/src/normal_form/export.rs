use std::io::Write;

use crate::error::{Error, Result};
use crate::spectral::{inverse_transform, signed_index, torus_coordinate, GridField2D, Space};

/// Physical torus field as `y1,y2,re,im` rows; spectral input is transformed.
pub fn write_field_csv<W: Write>(field: &GridField2D, mut w: W) -> Result<()> {
    let phys = match field.space() {
        Space::Physical => field.clone(),
        Space::Spectral => inverse_transform(field)?,
    };
    let (n1, n2) = phys.extents();
    writeln!(w, "y1,y2,re,im")?;
    for (o, v) in phys.values().iter().enumerate() {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            torus_coordinate(o / n2, n1),
            torus_coordinate(o % n2, n2),
            v.re,
            v.im
        )?;
    }
    Ok(())
}

/// Spectral field as `k1,k2,re,im` rows over signed indices.
pub fn write_spectrum_csv<W: Write>(field: &GridField2D, mut w: W) -> Result<()> {
    if field.space() != Space::Spectral {
        return Err(Error::Config("write_spectrum_csv expects a spectral field".into()));
    }
    let (n1, n2) = field.extents();
    writeln!(w, "k1,k2,re,im")?;
    for (o, v) in field.values().iter().enumerate() {
        writeln!(w, "{},{},{:.16e},{:.16e}", signed_index(o / n2, n1), signed_index(o % n2, n2), v.re, v.im)?;
    }
    Ok(())
}
