use serde::{Deserialize, Serialize};

use super::config::{hex_digest, read};
use super::{hash_line, pretty_json, ExperimentError, KernelSpec, OutputSet};
use crate::kernel::{contraction_norm, fractional_density_constant, SparseKernel};

/// Arguments of `build-kernel`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildRequest {
    pub kernel: KernelSpec,
    /// Also write `kernel.json`.
    pub json: bool,
}

impl BuildRequest {
    pub fn hash(&self) -> Result<String, ExperimentError> {
        let mut bytes = b"build-kernel\n".to_vec();
        bytes.extend(serde_json::to_vec(self).expect("request serializes"));
        if let KernelSpec::File(f) = &self.kernel {
            bytes.extend(read(&f.path)?.into_bytes());
        }
        Ok(hex_digest(&bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionNorm {
    pub r: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub sf: f64,
    /// `t^e` for kernels with a known limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
}

/// Summary numbers written next to a built kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    pub config_hash: String,
    pub order: usize,
    pub size: usize,
    pub supports: usize,
    pub squared_norm: f64,
    pub rho_squared: f64,
    pub max_influence: f64,
    pub contraction_norms: Vec<ContractionNorm>,
    pub profile: Vec<ProfilePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_limit_deviation: Option<f64>,
    /// Empirical `b` with `|F_m| ~ b m^e`, fractional kernels only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density_constant: Option<f64>,
}

pub fn kernel_diagnostics(
    kernel: &SparseKernel,
    spec: &KernelSpec,
    config_hash: &str,
) -> Result<KernelDiagnostics, ExperimentError> {
    let times: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    let exponent = spec.limit_exponent();
    let profile: Vec<ProfilePoint> = times
        .iter()
        .zip(kernel.prefix_profile(&times))
        .map(|(&t, sf)| ProfilePoint {
            t,
            sf,
            limit: exponent.map(|e| t.powf(e)),
        })
        .collect();
    let max_limit_deviation = exponent.map(|_| {
        profile
            .iter()
            .map(|p| (p.sf - p.limit.unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    });
    let contraction_norms = (1..kernel.order())
        .map(|r| {
            Ok(ContractionNorm {
                r,
                norm: contraction_norm(kernel, r)?,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let density_constant = match spec {
        KernelSpec::Fractional(f) => Some(fractional_density_constant(f.order, f.arity, f.size)),
        _ => None,
    };
    Ok(KernelDiagnostics {
        config_hash: config_hash.to_string(),
        order: kernel.order(),
        size: kernel.size(),
        supports: kernel.len(),
        squared_norm: kernel.squared_norm(),
        rho_squared: kernel.rho_squared(),
        max_influence: kernel.max_influence(),
        contraction_norms,
        profile,
        limit_exponent: exponent,
        max_limit_deviation,
        density_constant,
    })
}

/// Builds the kernel and collects `kernel.txt`, optionally `kernel.json`,
/// and `kernel_diagnostics.json`.
pub fn build_kernel(
    request: &BuildRequest,
) -> Result<(SparseKernel, KernelDiagnostics, OutputSet), ExperimentError> {
    let hash = request.hash()?;
    let kernel = request.kernel.build()?;
    let diagnostics = kernel_diagnostics(&kernel, &request.kernel, &hash)?;
    let mut out = OutputSet::default();
    out.add("kernel.txt", hash_line(&hash) + &kernel.to_text());
    if request.json {
        let mut json = kernel.to_json_tagged(&hash);
        json.push('\n');
        out.add("kernel.json", json);
    }
    out.add("kernel_diagnostics.json", pretty_json(&diagnostics));
    Ok((kernel, diagnostics, out))
}
