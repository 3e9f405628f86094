//! wasm-bindgen surface for the static page in `www/`.

use expoly_core::hypotheses::{self, DEFAULT_ANGLE_TOL};
use expoly_core::orbit::ClassifyParams;
use expoly_core::raster::{self, Palette, Viewport};
use expoly_core::{library, Complex64, ExpPoly};
use wasm_bindgen::prelude::*;

fn load(spec: &str) -> Result<ExpPoly, String> {
    match library::by_name(spec.trim()) {
        Some(f) => Ok(f),
        None => ExpPoly::from_json(spec).map_err(|e| e.to_string()),
    }
}

fn viewport(center_re: f64, center_im: f64, half: f64, px: u32) -> Viewport {
    Viewport::square(Complex64::new(center_re, center_im), half, px as usize)
}

/// Bundled definition names, comma separated.
#[wasm_bindgen]
pub fn bundled_names() -> String {
    library::BUNDLED.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(",")
}

/// JSON source of a bundled definition.
#[wasm_bindgen]
pub fn bundled_source(name: &str) -> Option<String> {
    library::BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| s.to_string())
}

pub fn classification_rgba(spec: &str, center_re: f64, center_im: f64, half: f64, px: u32) -> Result<Vec<u8>, String> {
    let f = load(spec)?;
    let img = raster::render_classification(&f, &viewport(center_re, center_im, half, px), ClassifyParams::for_function(&f), &Palette::default())
        .map_err(|e| e.to_string())?;
    Ok(img.to_rgba())
}

pub fn exceptional_rgba(spec: &str, center_re: f64, center_im: f64, half: f64, px: u32) -> Result<Vec<u8>, String> {
    let f = load(spec)?;
    let img = raster::render_exceptional(&f, &viewport(center_re, center_im, half, px)).map_err(|e| e.to_string())?;
    Ok(img.to_rgba())
}

pub fn hypotheses_json(spec: &str) -> Result<String, String> {
    Ok(hypotheses::check_hypotheses(&load(spec)?, DEFAULT_ANGLE_TOL).to_json())
}

/// RGBA pixels (`px` by `px`) of the orbit classification; `spec` is a
/// bundled name or a JSON definition.
#[wasm_bindgen]
pub fn render_classification(spec: &str, center_re: f64, center_im: f64, half: f64, px: u32) -> Result<Vec<u8>, JsError> {
    classification_rgba(spec, center_re, center_im, half, px).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn render_exceptional(spec: &str, center_re: f64, center_im: f64, half: f64, px: u32) -> Result<Vec<u8>, JsError> {
    exceptional_rgba(spec, center_re, center_im, half, px).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn check_hypotheses(spec: &str) -> Result<String, JsError> {
    hypotheses_json(spec).map_err(|e| JsError::new(&e))
}
