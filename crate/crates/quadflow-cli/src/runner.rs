//! Subcommand implementations: scenario execution and artifact emission.

use crate::config::{Config, ConfigError};
use quadflow::coherent::propagate;
use quadflow::metaplectic::{
    covariant_symbol, cz_index, degenerate_covariant, matrix_element, theta_arg,
    GaussianSymbol, IndexResult,
};
use quadflow::symcore::{flow, PhasePoint, SymplecticPath};
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("QUADFLOW_THREADS must be a positive integer, got {0:?}")]
    Threads(String),
}

fn num<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

fn read_config(path: &Path) -> Result<Config, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Config::from_str(&text)?)
}

fn check_thread_env() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("QUADFLOW_THREADS") {
        if v.parse::<usize>().map(|t| t >= 1) != Ok(true) {
            return Err(CliError::Threads(v));
        }
        // All kernels are currently single-threaded dense linear algebra;
        // the variable is validated and reserved.
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    f.write_all(contents.as_bytes()).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn scenario_path(cfg: &Config) -> Result<SymplecticPath, CliError> {
    let h = cfg.hamiltonian()?;
    flow(&h, cfg.time.start, cfg.time.stop, cfg.time.min_nodes).map_err(num)
}

/// Evenly spaced node indices including both endpoints.
fn sample_indices(total: usize, rows: usize) -> Vec<usize> {
    let rows = rows.clamp(2, total);
    (0..rows).map(|k| k * (total - 1) / (rows - 1)).collect()
}

#[derive(Serialize)]
struct ManifestCheck {
    name: String,
    pass: bool,
    value: f64,
    tolerance: f64,
}

pub fn run(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    check_thread_env()?;
    let cfg = read_config(config_path)?;
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut files: Vec<String> = Vec::new();
    let mut checks: Vec<ManifestCheck> = Vec::new();

    let path = scenario_path(&cfg)?;
    let endpoint = path.endpoint();
    let sympl_residual = {
        let f = endpoint.matrix();
        let n = cfg.n;
        let j = quadflow::symcore::standard_symplectic_form(n);
        (f.transpose() * &j * f - &j).norm()
    };
    checks.push(ManifestCheck {
        name: "endpoint symplectic residual".into(),
        pass: sympl_residual < 1e-9,
        value: sympl_residual,
        tolerance: 1e-9,
    });

    let rows = cfg.samples.unwrap_or(64);

    if cfg.outputs.iter().any(|o| o == "flow") {
        let mut csv = String::from("t");
        let d = 2 * cfg.n;
        for i in 0..d {
            for j in 0..d {
                csv.push_str(&format!(",f{i}{j}"));
            }
        }
        csv.push('\n');
        for idx in sample_indices(path.nodes().len(), rows) {
            csv.push_str(&format!("{}", path.times()[idx]));
            let f = path.nodes()[idx].matrix();
            for i in 0..d {
                for j in 0..d {
                    csv.push_str(&format!(",{:.17e}", f[(i, j)]));
                }
            }
            csv.push('\n');
        }
        write_file(out_dir, "flow.csv", &csv)?;
        files.push("flow.csv".into());
    }

    let needs_state = cfg.outputs.iter().any(|o| o == "state-path" || o == "wigner");
    let states = if needs_state {
        let s0 = cfg.initial_state()?;
        Some(propagate(&path, &s0).map_err(num)?)
    } else {
        None
    };

    if cfg.outputs.iter().any(|o| o == "state-path") {
        let states = states.as_ref().expect("propagated above");
        let n = cfg.n;
        let mut csv = String::from("t");
        for i in 0..n {
            csv.push_str(&format!(",q{i}"));
        }
        for i in 0..n {
            csv.push_str(&format!(",p{i}"));
        }
        csv.push_str(",amp_re,amp_im");
        for i in 0..n {
            for j in 0..n {
                csv.push_str(&format!(",gamma_re{i}{j}"));
            }
        }
        for i in 0..n {
            for j in 0..n {
                csv.push_str(&format!(",gamma_im{i}{j}"));
            }
        }
        csv.push('\n');
        for idx in sample_indices(states.len(), rows) {
            let s = &states[idx];
            csv.push_str(&format!("{}", path.times()[idx]));
            for v in s.center().as_vec().iter() {
                csv.push_str(&format!(",{:.17e}", v));
            }
            let a = s.amplitude();
            csv.push_str(&format!(",{:.17e},{:.17e}", a.re, a.im));
            let g = s.gamma().matrix();
            for i in 0..n {
                for j in 0..n {
                    csv.push_str(&format!(",{:.17e}", g[(i, j)].re));
                }
            }
            for i in 0..n {
                for j in 0..n {
                    csv.push_str(&format!(",{:.17e}", g[(i, j)].im));
                }
            }
            csv.push('\n');
        }
        write_file(out_dir, "state_path.csv", &csv)?;
        files.push("state_path.csv".into());
        let last = states.last().expect("nonempty");
        let norm_residual = last.norm_residual();
        checks.push(ManifestCheck {
            name: "final state normalization residual".into(),
            pass: norm_residual < 1e-9,
            value: norm_residual,
            tolerance: 1e-9,
        });
        let min_im = last.gamma().min_im_eigenvalue();
        checks.push(ManifestCheck {
            name: "final covariance positivity (min Im eigenvalue)".into(),
            pass: min_im > 0.0,
            value: min_im,
            tolerance: 0.0,
        });
    }

    if cfg.outputs.iter().any(|o| o == "wigner") {
        let states = states.as_ref().expect("propagated above");
        let last = states.last().expect("nonempty");
        let w = cfg.wigner.clone().unwrap_or(crate::config::WignerSpec {
            half_width: 3.0,
            points: 41,
        });
        let zc = last.center().as_vec().clone();
        let n = cfg.n;
        let mut pts = Vec::with_capacity(w.points * w.points);
        let coord = |k: usize| -> f64 {
            if w.points == 1 {
                0.0
            } else {
                -w.half_width + 2.0 * w.half_width * k as f64 / (w.points - 1) as f64
            }
        };
        for iq in 0..w.points {
            for ip in 0..w.points {
                let mut v = zc.clone();
                v[0] += coord(iq);
                v[n] += coord(ip);
                pts.push(PhasePoint::new(v).map_err(num)?);
            }
        }
        let vals = quadflow::coherent::wigner(last, &pts);
        let mut csv = String::from("q,p,w\n");
        for (pt, val) in pts.iter().zip(&vals) {
            csv.push_str(&format!(
                "{:.17e},{:.17e},{:.17e}\n",
                pt.as_vec()[0],
                pt.as_vec()[n],
                val
            ));
        }
        write_file(out_dir, "wigner.csv", &csv)?;
        files.push("wigner.csv".into());
    }

    if cfg.outputs.iter().any(|o| o == "index") {
        let report = cz_index(&path).map_err(num)?;
        write_file(out_dir, "index.json", &index_json(&report)?)?;
        write_file(out_dir, "winding.csv", &winding_csv(&report))?;
        files.push("index.json".into());
        files.push("winding.csv".into());
    }

    if cfg.outputs.iter().any(|o| o == "symbol") {
        write_file(out_dir, "symbol.json", &symbol_json(&path)?)?;
        files.push("symbol.json".into());
    }

    if cfg.outputs.iter().any(|o| o == "matrix-elements") {
        let theta = theta_arg(&path).map_err(num)?;
        let probes = [-0.8, -0.3, 0.0, 0.4, 0.9];
        let mut csv = String::from("zq,zp,xq,xp,re,im\n");
        let n = cfg.n;
        for &zq in &probes {
            for &zp in &probes {
                for &(xq, xp) in &[(0.0, 0.0), (0.5, -0.4), (-0.6, 0.3)] {
                    let mut zv = nalgebra::DVector::zeros(2 * n);
                    zv[0] = zq;
                    zv[n] = zp;
                    let mut xv = nalgebra::DVector::zeros(2 * n);
                    xv[0] = xq;
                    xv[n] = xp;
                    let z = PhasePoint::new(zv).map_err(num)?;
                    let x = PhasePoint::new(xv).map_err(num)?;
                    let me = matrix_element(endpoint, theta, &z, &x);
                    csv.push_str(&format!(
                        "{zq},{zp},{xq},{xp},{:.17e},{:.17e}\n",
                        me.re, me.im
                    ));
                }
            }
        }
        write_file(out_dir, "matrix_elements.csv", &csv)?;
        files.push("matrix_elements.csv".into());
    }

    if cfg.outputs.iter().any(|o| o == "verify") {
        let report = quadflow::verify::run_all(cfg.seed, false);
        for c in &report.criteria {
            checks.push(ManifestCheck {
                name: format!("verify: {}", c.name),
                pass: c.pass,
                value: c.worst,
                tolerance: f64::NAN,
            });
        }
    }

    let manifest = json!({
        "version": crate::config::CONFIG_VERSION,
        "config": cfg,
        "files": files,
        "checks": checks,
    });
    write_file(out_dir, "manifest.json", &serde_json::to_string_pretty(&manifest).map_err(num)?)?;

    if checks.iter().any(|c| !c.pass) {
        let names: Vec<&str> =
            checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(CliError::Numerical(format!("checks failed: {}", names.join(", "))));
    }
    Ok(())
}

pub fn verify(seed: u64, full: bool) -> Result<(), CliError> {
    check_thread_env()?;
    let report = quadflow::verify::run_all(seed, full);
    for c in &report.criteria {
        println!("{}", c.line());
    }
    println!("{}", serde_json::to_string(&report).map_err(num)?);
    if report.all_pass() {
        Ok(())
    } else {
        let names: Vec<String> = report
            .criteria
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect();
        Err(CliError::VerifyFailed(names.join(", ")))
    }
}

fn index_json(report: &IndexResult) -> Result<String, CliError> {
    let summary = json!({
        "nu": report.nu,
        "im_integral": report.im_integral,
        "epsilons": report.epsilons,
        "raw_windings": report.raw,
        "det_one_plus": report.det_one_plus,
        "classification": if report.det_one_plus > 0.0 { "integer" } else { "half-integer" },
    });
    serde_json::to_string_pretty(&summary).map_err(num)
}

fn winding_csv(report: &IndexResult) -> String {
    let mut csv = String::from("t,delta_re,delta_im,arg\n");
    for (t, re, im, acc) in &report.winding {
        csv.push_str(&format!("{t},{re:.17e},{im:.17e},{acc:.17e}\n"));
    }
    csv
}

fn symbol_json(path: &SymplecticPath) -> Result<String, CliError> {
    let endpoint = path.endpoint();
    let report = cz_index(path).map_err(num)?;
    let contra = quadflow::metaplectic::mw_contravariant(endpoint, report.nu).map_err(num)?;
    let f = endpoint.matrix();
    let d = f.nrows();
    let det_one_minus = (nalgebra::DMatrix::identity(d, d) - f).determinant();
    let covariant: serde_json::Value = if det_one_minus.abs() > 1e-8 * f.norm().max(1.0) {
        let cov = covariant_symbol(path).map_err(num)?;
        json!({"kind": "gaussian", "symbol": gaussian_json(&cov)})
    } else {
        let dec = degenerate_covariant(endpoint).map_err(num)?;
        let info = dec.dirac.as_ref().expect("degenerate symbol is decorated");
        json!({
            "kind": "dirac-decorated",
            "prefactor_re": dec.prefactor.re,
            "prefactor_im": dec.prefactor.im,
            "dirac_basis": matrix_rows(&info.dirac_basis),
            "complement_basis": matrix_rows(&info.complement_basis),
            "w_reduced": matrix_rows(&info.w_reduced),
            "mu1": info.mu1,
            "sg_q": info.sg_q,
        })
    };
    let out = json!({
        "nu": report.nu,
        "contravariant": gaussian_json(&contra),
        "covariant": covariant,
        "det_one_minus": det_one_minus,
    });
    serde_json::to_string_pretty(&out).map_err(num)
}

fn gaussian_json(sym: &GaussianSymbol) -> serde_json::Value {
    let re = sym.m.map(|c| c.re);
    let im = sym.m.map(|c| c.im);
    json!({
        "prefactor_re": sym.prefactor.re,
        "prefactor_im": sym.prefactor.im,
        "m_re": matrix_rows(&re),
        "m_im": matrix_rows(&im),
    })
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn index(config_path: &Path, out_dir: Option<&Path>) -> Result<(), CliError> {
    check_thread_env()?;
    let cfg = read_config(config_path)?;
    let path = scenario_path(&cfg)?;
    let report = cz_index(&path).map_err(num)?;
    let text = index_json(&report)?;
    println!("{text}");
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        write_file(dir, "index.json", &text)?;
        write_file(dir, "winding.csv", &winding_csv(&report))?;
    }
    Ok(())
}

pub fn symbol(config_path: &Path, out_dir: Option<&Path>) -> Result<(), CliError> {
    check_thread_env()?;
    let cfg = read_config(config_path)?;
    let path = scenario_path(&cfg)?;
    let text = symbol_json(&path)?;
    println!("{text}");
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        write_file(dir, "symbol.json", &text)?;
    }
    Ok(())
}

