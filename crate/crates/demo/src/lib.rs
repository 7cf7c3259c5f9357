//! Browser bindings for the jetx demo page.
//!
//! Each export has a plain Rust counterpart returning `Result<_, String>`;
//! the exports only convert errors into JavaScript exceptions.

use jetx::format::to_json_17;
use jetx::jet::{compute_a, m_omega_g};
use jetx::{extend, ExtendConfig, GridSpec, Jet, Modulus, ModulusSpec, SearchBox, Variant};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn modulus(text: &str) -> Result<Modulus, String> {
    let spec: ModulusSpec = serde_json::from_str(text).map_err(|e| e.to_string())?;
    Modulus::try_from(spec).map_err(|e| e.to_string())
}

fn jet(text: &str) -> Result<Jet, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// Rows `(t, ω(t), φ(t), φ*(t))` for `t` in `[0, t_max]`, flattened.
pub fn curves(modulus_json: &str, t_max: f64, rows: usize) -> Result<Vec<f64>, String> {
    let m = modulus(modulus_json)?;
    if !(t_max > 0.0 && t_max.is_finite()) || rows < 2 {
        return Err("need t_max > 0 and at least two rows".into());
    }
    let mut out = Vec::with_capacity(4 * rows);
    for k in 0..rows {
        let t = t_max * k as f64 / (rows - 1) as f64;
        out.extend([t, m.omega(t), m.phi(t), m.phi_star(t)]);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Constants {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "M_omega_G")]
    m_omega_g: f64,
    witness: Vec<Vec<f64>>,
    warnings: Vec<String>,
}

/// `A(f, G)` and `M_ω(G)` of a jet as JSON.
pub fn constants(jet_json: &str, modulus_json: &str) -> Result<String, String> {
    let jet = jet(jet_json)?;
    let m = modulus(modulus_json)?;
    let a = compute_a(&jet, &m, &SearchBox::coarse()).map_err(|e| e.to_string())?;
    let g = m_omega_g(&jet, &m).map_err(|e| e.to_string())?;
    to_json_17(&Constants {
        a: a.constant,
        m_omega_g: g.constant,
        witness: a.witness,
        warnings: a.warnings,
    })
    .map_err(|e| e.to_string())
}

/// A one-dimensional extension with the bounds it was squeezed between.
#[wasm_bindgen]
pub struct Extension1d {
    x: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
    m_used: f64,
    a_jet: f64,
}

#[wasm_bindgen]
impl Extension1d {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    /// `m` on the grid.
    pub fn lower(&self) -> Vec<f64> {
        self.lower.clone()
    }

    /// `g` on the grid.
    pub fn upper(&self) -> Vec<f64> {
        self.upper.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn m_used(&self) -> f64 {
        self.m_used
    }

    pub fn a_jet(&self) -> f64 {
        self.a_jet
    }
}

/// Extension of a 1-D jet on `[lo, hi]` with `res` nodes.
pub fn extension_1d(
    jet_json: &str,
    modulus_json: &str,
    variant: &str,
    lo: f64,
    hi: f64,
    res: usize,
) -> Result<Extension1d, String> {
    let jet = jet(jet_json)?;
    if jet.dim() != 1 {
        return Err("the demo draws one-dimensional jets only".into());
    }
    let m = modulus(modulus_json)?;
    let variant: Variant = variant.parse().map_err(|e: jetx::Error| e.to_string())?;
    let grid = GridSpec::new(vec![lo], vec![hi], vec![res]).map_err(|e| e.to_string())?;
    let mut cfg = ExtendConfig::new(grid);
    cfg.search = SearchBox::coarse();
    let ext = extend(&jet, &m, variant, &cfg).map_err(|e| e.to_string())?;
    let spec = &ext.extension.spec;
    let x = (0..spec.len()).map(|i| spec.coord_flat(i)[0]).collect();
    Ok(Extension1d {
        x,
        lower: ext.lower.values.clone(),
        upper: ext.upper.values.clone(),
        values: ext.extension.values.clone(),
        m_used: ext.m_used,
        a_jet: ext.a_jet,
    })
}

#[wasm_bindgen(js_name = curves)]
pub fn curves_js(modulus_json: &str, t_max: f64, rows: usize) -> Result<Vec<f64>, JsError> {
    curves(modulus_json, t_max, rows).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = constants)]
pub fn constants_js(jet_json: &str, modulus_json: &str) -> Result<String, JsError> {
    constants(jet_json, modulus_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = extension1d)]
pub fn extension_1d_js(
    jet_json: &str,
    modulus_json: &str,
    variant: &str,
    lo: f64,
    hi: f64,
    res: usize,
) -> Result<Extension1d, JsError> {
    extension_1d(jet_json, modulus_json, variant, lo, hi, res).map_err(|e| JsError::new(&e))
}
