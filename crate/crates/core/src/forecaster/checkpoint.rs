//! JSON checkpoints. `f64` values are written in shortest round-trip form and
//! parsed back exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ForecastModel;
use crate::error::{Error, Result};

const FORMAT: &str = "longcause-gru-v1";

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    n_vars: usize,
    hidden: usize,
    n_params: usize,
    model: ForecastModel,
}

pub fn save_checkpoint(model: &ForecastModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ckpt = Checkpoint {
        format: FORMAT.into(),
        n_vars: model.params.n_vars,
        hidden: model.params.hidden,
        n_params: model.params.data.len(),
        model: model.clone(),
    };
    let text = serde_json::to_string(&ckpt)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ForecastModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    if ckpt.format != FORMAT {
        return Err(Error::Data(format!("unsupported checkpoint format `{}`", ckpt.format)));
    }
    let p = &ckpt.model.params;
    if p.n_vars != ckpt.n_vars
        || p.hidden != ckpt.hidden
        || p.data.len() != ckpt.n_params
        || p.data.len() != super::GruParams::len_for(p.n_vars, p.hidden)
    {
        return Err(Error::Data("checkpoint shape header does not match tensor".into()));
    }
    Ok(ckpt.model)
}
