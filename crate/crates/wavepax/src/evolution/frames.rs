//! Fast/slow frame changes `Û = e^{−iτL/ϱ}û` and modal projections.

use crate::dispersion::{DispersionModel, SymbolTable};
use crate::error::{Result, WavepaxError};
use crate::sign::Sign;
use crate::wavepacket::{Frame, ModalField};

/// Converts `field` to the other frame at time `τ`: slow → fast applies
/// `e^{−iτL/ϱ}`, fast → slow applies `e^{iτL/ϱ}`.
pub fn fast_slow_transform(
    field: &ModalField,
    table: &SymbolTable,
    rho: f64,
    tau: f64,
) -> Result<ModalField> {
    check(field, table)?;
    let mut out = field.clone();
    match field.frame {
        Frame::Slow => {
            table.apply_exp(tau / rho, &mut out.data);
            out.frame = Frame::Fast;
        }
        Frame::Fast => {
            table.apply_exp(-tau / rho, &mut out.data);
            out.frame = Frame::Slow;
        }
    }
    Ok(out)
}

/// Modal component `û_{n,ζ}(k) = Π_{n,ζ}(k)û(k)`. Band-crossing nodes are
/// zeroed; their number is returned alongside the projection.
pub fn modal_project(
    field: &ModalField,
    table: &SymbolTable,
    model: &DispersionModel,
    n: usize,
    zeta: Sign,
) -> Result<(ModalField, usize)> {
    check(field, table)?;
    let c = model.slot(n, zeta)?;
    let mut data = table.project(c, &field.data);
    let len = field.nodes();
    let mut zeroed = 0;
    for (idx, &flag) in table.flagged.iter().enumerate() {
        if flag {
            zeroed += 1;
            for r in 0..field.ncomp {
                data[r * len + idx] = Default::default();
            }
        }
    }
    Ok((
        ModalField::from_data(&field.grid, field.ncomp, field.frame, data)?,
        zeroed,
    ))
}

fn check(field: &ModalField, table: &SymbolTable) -> Result<()> {
    if field.grid != table.grid || field.ncomp != table.ncomp {
        return Err(WavepaxError::GridMismatch(
            "field and symbol table differ".into(),
        ));
    }
    Ok(())
}
