//! Check orchestration and report emission.
//!
//! Sections run in a fixed order and each yields a list of reports. A
//! section that errors contributes a failing report carrying the message,
//! so one bad check never hides the others. The exit code is 0 when every
//! report matches its expected outcome (negative controls are expected to
//! fail), 1 otherwise.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::automorphy::{rdq_check, MixedFactor};
use crate::calculus::{Grid, ScalarField};
use crate::config::SystemConfig;
use crate::equivariant::{check_equivariance, HOMOMORPHISM_SAMPLES};
use crate::highdim::{
    constant_field_test, equivariance_check_n, potential_n, two_form_coeffs, EquivariantMapN, GridN, PointN,
};
use crate::magnetics::{apply_landau, ChiTauConvention, MagneticSystem};
use crate::report::Residuals;
use crate::spectral::{
    adjudicate_laguerre_scale, eigen_residual, hermiticity_residual, kernel, kernel_eigen_residual,
    kernel_invariance_residual, landau_eigenfunction, landau_level, level_check, spectrum, LaguerreScale, Projector,
    SpectralBasis, TRUNCATION_TAIL,
};
use crate::{CheckReport, GroupElement, MafError, Result, C64};

/// Groups of checks, in run order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Equivariance,
    Field,
    Gauge,
    Invariance,
    Lift,
    Spectrum,
    Kernel,
    Highdim,
}

impl Section {
    pub const ALL: [Section; 8] = [
        Section::Equivariance,
        Section::Field,
        Section::Gauge,
        Section::Invariance,
        Section::Lift,
        Section::Spectrum,
        Section::Kernel,
        Section::Highdim,
    ];
}

/// Reports plus the process exit code.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<CheckReport>,
    pub exit_code: i32,
}

/// Output format of [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Every section.
pub fn run_all(cfg: &SystemConfig) -> Result<RunOutcome> {
    run_sections(cfg, &Section::ALL)
}

/// The given sections, always in declaration order. Fails only when the
/// configuration itself does not build.
pub fn run_sections(cfg: &SystemConfig, sections: &[Section]) -> Result<RunOutcome> {
    let sys = cfg.system()?;
    let ctx = Ctx { cfg, sys: &sys };
    let mut reports = vec![conventions()];
    for s in Section::ALL.iter().filter(|s| sections.contains(s)) {
        let out = match s {
            Section::Equivariance => ctx.equivariance(),
            Section::Field => ctx.field(),
            Section::Gauge => ctx.gauge(),
            Section::Invariance => ctx.invariance(),
            Section::Lift => ctx.lift(),
            Section::Spectrum => ctx.spectrum(),
            Section::Kernel => ctx.kernel(),
            Section::Highdim => ctx.highdim(),
        };
        match out {
            Ok(rs) => reports.extend(rs),
            Err(e) => reports.push(error_report(*s, &e)),
        }
    }
    for r in &mut reports {
        if let (Some(t), true) = (cfg.tol, r.expected_pass) {
            *r = r.clone().with_tol(t);
        }
        r.metadata.insert("system".into(), cfg.name.clone().into());
    }
    let exit_code = if reports.iter().all(CheckReport::as_expected) { 0 } else { 1 };
    Ok(RunOutcome { reports, exit_code })
}

fn error_report(s: Section, e: &MafError) -> CheckReport {
    let name = serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    CheckReport::scalar(format!("{name}_error"), f64::INFINITY, 0.0).with_meta("error", e.to_string())
}

/// Echo of the conventions every check relies on.
fn conventions() -> CheckReport {
    CheckReport::scalar("conventions", 0.0, 0.0)
        .with_meta("automorphic_factor", "j^a(g,z) = exp(-i a Im(z conj(g^-1.0)))")
        .with_meta("rdq", "chi(g g') = chi(g) chi(g') exp(+i phase)")
        .with_meta("gauge", "dphi/dz = (i/2)(conj(S) - B zbar), phi(0) = 0")
        .with_meta("chi_tau", "chi(g) exp(i phi(g.0) - i mu Im<tau(0), rho(g)^-1.0>)")
        .with_meta("eigenfunctions", "exp(-i phi) exp(-B|z|^2/2) strip basis, level index m")
        .with_meta("kernel_gauge", "exp(-i(phi(z) - phi(w)))")
}

struct Ctx<'a> {
    cfg: &'a SystemConfig,
    sys: &'a MagneticSystem,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_point(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn random_motion(rng: &mut ChaCha8Rng) -> GroupElement {
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    GroupElement::from_angle(t, random_point(rng, 2.0))
}

fn labelled(mut r: CheckReport, name: String) -> CheckReport {
    r.name = name;
    r
}

impl Ctx<'_> {
    fn fd(&self, f: ScalarField) -> ScalarField {
        f.with_fd_step(self.cfg.fd_step)
    }

    fn test_fields(&self) -> Vec<ScalarField> {
        [(0, 0, 0.5), (1, 0, 0.4), (0, 1, 0.6), (1, 1, 0.5), (2, 1, 0.3)]
            .into_iter()
            .map(|(p, q, c)| self.fd(ScalarField::gaussian_monomial(p, q, c)))
            .collect()
    }

    fn generators(&self) -> Vec<(String, GroupElement)> {
        let g = self.sys.gamma();
        g.labels().iter().cloned().zip(g.generators().iter().copied()).collect()
    }

    fn equivariance(&self) -> Result<Vec<CheckReport>> {
        let (sys, seed) = (self.sys, self.cfg.seed);
        let mut out = vec![
            check_equivariance(sys.rho(), sys.tau(), 200, seed),
            sys.rho().homomorphism_residual(HOMOMORPHISM_SAMPLES, seed),
        ];
        let (nu, mu, chi, len) = match &self.cfg.rdq {
            Some(r) => (r.nu, r.mu.unwrap_or(sys.mu()), r.chi.clone(), r.max_word_len),
            None => (sys.nu(), sys.mu(), sys.chi().values_on_generators.clone(), crate::automorphy::DEFAULT_RDQ_WORD_LEN),
        };
        if chi.len() != sys.gamma().rank() {
            return Err(MafError::Config(format!("rdq: χ has {} values for {} generators", chi.len(), sys.gamma().rank())));
        }
        let chi = crate::automorphy::PseudoCharacter::new(chi);
        out.push(rdq_check(nu, mu, sys.rho(), sys.gamma(), &chi, len)?);
        if let Some(control) = self.cfg.rdq.as_ref().and_then(|r| r.control_nu) {
            let r = rdq_check(control, mu, sys.rho(), sys.gamma(), &chi, len)?;
            out.push(labelled(r, "rdq_control".into()).expecting_failure());
        }
        // cocycle defect of the free factor at the quantization parameters
        let factor = MixedFactor::new(nu, mu, sys.rho().clone(), sys.tau().clone());
        let grid = Grid::square(2.0, 9);
        let words = sys.gamma().enumerate_words(1);
        let (mut spread, mut vs_phase) = (Vec::new(), Vec::new());
        for g in &words {
            for gp in &words {
                spread.push(factor.defect_spread(g, gp, &grid));
                vs_phase.push(factor.defect_vs_phase(g, gp, -1.0, &grid));
            }
        }
        out.push(CheckReport::combine("cocycle_defect_spread", 1e-9, &spread).with_meta("nu", nu));
        out.push(
            CheckReport::combine("cocycle_defect_vs_phase", 1e-9, &vs_phase)
                .with_meta("nu", nu)
                .with_meta("target", "exp(-i phase)"),
        );
        Ok(out)
    }

    fn field(&self) -> Result<Vec<CheckReport>> {
        let sys = self.sys;
        let grid = self.cfg.grid;
        let analytic = sys.field_constancy(&grid)?;
        // same quantity with finite-difference derivatives of τ
        let tau = self.fd(sys.tau().field().numeric());
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for z in grid.points() {
            let (d, db) = tau.wirtinger_fd(z)?;
            let b = sys.nu() + sys.mu() * (d.norm_sqr() - db.norm_sqr());
            lo = lo.min(b);
            hi = hi.max(b);
        }
        let fd = CheckReport::scalar("field_constancy_fd", hi - lo, 1e-6)
            .with_meta("B_min", lo)
            .with_meta("B_max", hi)
            .with_meta("fd_step", self.cfg.fd_step);
        Ok(vec![analytic, fd, sys.curl_residual(&Grid::square(2.0, 9))])
    }

    fn gauge(&self) -> Result<Vec<CheckReport>> {
        let sys = self.sys;
        let mut r = rng(self.cfg.seed, 1);
        let points: Vec<C64> = (0..20).map(|_| random_point(&mut r, 2.0)).collect();
        let closed = sys.gauge_closedness(&points)?;
        let imag = closed.metadata.get("max_abs_imag").and_then(|v| v.as_f64()).unwrap_or(f64::INFINITY);
        let imag = CheckReport::scalar("gauge_imaginary_part", imag, crate::magnetics::GAUGE_IMAG_TOL);
        let loops: Vec<Vec<C64>> = (0..5)
            .map(|_| (0..3 + r.gen_range(0..2)).map(|_| random_point(&mut r, 2.0)).collect())
            .collect();
        let loop_rep = sys.gauge_loop_residual(&loops)?;
        Ok(vec![closed, imag, loop_rep])
    }

    fn invariance(&self) -> Result<Vec<CheckReport>> {
        let sys = self.sys;
        let mut r = rng(self.cfg.seed, 2);
        let f = self.fd(ScalarField::gaussian_monomial(1, 0, 0.5));
        let grid = Grid::square(1.5, 7);
        let parts = (0..10)
            .map(|_| sys.invariance_residual(&random_motion(&mut r), &f, &grid))
            .collect::<Result<Vec<_>>>()?;
        let inv = CheckReport::combine("invariance", 1e-5, &parts);

        let grid = Grid::square(2.0, 9);
        let parts = self
            .test_fields()
            .iter()
            .map(|f| sys.intertwining_residual(f, &grid, None))
            .collect::<Result<Vec<_>>>()?;
        let tw = CheckReport::combine("intertwining", 1e-5, &parts);
        let f = self.fd(ScalarField::gaussian_monomial(0, 0, 0.5));
        let control = sys.intertwining_residual(&f, &Grid::square(1.0, 9), Some(sys.b() + 0.1))?;
        Ok(vec![inv, tw, labelled(control, "intertwining_control".into()).expecting_failure()])
    }

    fn lift(&self) -> Result<Vec<CheckReport>> {
        let sys = self.sys;
        let grid = self.cfg.grid;
        let mut out = Vec::new();
        for (label, g) in self.generators() {
            out.push(labelled(sys.chi_tau_hat_spread(&g, &grid)?, format!("chi_tau_hat_spread[{label}]")));
        }
        for (label, g) in self.generators() {
            out.push(labelled(sys.lifting_residual(&g, &grid, ChiTauConvention::Derived)?, format!("lifting[{label}]")));
            let derived = sys.chi_tau(&g, ChiTauConvention::Derived)?;
            for (conv, tag) in [(ChiTauConvention::DroppedCorrection, "dropped"), (ChiTauConvention::DoubledMu, "doubled_mu")] {
                // a control only makes sense when the convention changes the value
                if (sys.chi_tau(&g, conv)? - derived).norm() > 1e-6 {
                    let rep = sys.lifting_residual(&g, &grid, conv)?;
                    out.push(labelled(rep, format!("lifting_control_{tag}[{label}]")).expecting_failure());
                }
            }
        }
        Ok(out)
    }

    fn spectrum(&self) -> Result<Vec<CheckReport>> {
        let sys = self.sys;
        let sc = &self.cfg.spectral;
        let levels = spectrum(sys.b(), sc.m_max)?;
        let mut out = vec![CheckReport::scalar("spectrum", 0.0, 0.0)
            .with_meta("B", sys.b())
            .with_meta("levels", serde_json::to_value(&levels).unwrap_or_default())];
        match SpectralBasis::for_system(sys, sc.m_max, sc.n_max) {
            Ok(basis) => {
                for m in 0..=sc.m_max {
                    for n in -(sc.n_max as i64)..=sc.n_max as i64 {
                        out.push(labelled(level_check(&basis, sys, m, n)?, format!("landau_level[m={m},n={n}]")));
                    }
                }
            }
            Err(e) => {
                // no unit translation in Γ: verify the radial Landau eigenfunctions instead
                let points: Vec<C64> = Grid::square(1.4, 5).points().collect();
                for q in 0..=sc.m_max {
                    let f = self.fd(landau_eigenfunction(sys, q as u32));
                    let rep = eigen_residual(sys, &f, landau_level(sys.b(), q as i64)?, &points)?;
                    out.push(
                        labelled(rep, format!("landau_eigenfunction[q={q}]"))
                            .with_meta("level_index", q)
                            .with_meta("strip_basis", e.to_string()),
                    );
                }
            }
        }
        Ok(out)
    }

    fn kernel(&self) -> Result<Vec<CheckReport>> {
        let sys = self.sys;
        let kmax = self.cfg.spectral.kmax;
        let points: Vec<C64> = Grid::square(1.4, 5).points().collect();
        let verdict = adjudicate_laguerre_scale(sys, C64::new(0.3, -0.2), &Grid::square(1.5, 5))?;
        let scale = verdict.selected.unwrap_or(LaguerreScale::One);
        let mut out = vec![verdict.report.clone()];

        let parts = (0..=kmax)
            .map(|k| hermiticity_residual(sys, k, &points, scale))
            .collect::<Result<Vec<_>>>()?;
        out.push(CheckReport::combine("kernel_hermiticity", 1e-12, &parts));
        let mut diag = Residuals::new();
        for &z in &points {
            diag.push((kernel(sys, 0, z, z, scale)? - sys.b() / std::f64::consts::PI).norm());
        }
        out.push(diag.report("kernel_diagonal", 1e-12).with_meta("expected", sys.b() / std::f64::consts::PI));
        let grid = Grid::square(1.5, 5);
        for k in 0..=kmax {
            out.push(kernel_eigen_residual(sys, k, C64::new(-0.4, 0.5), scale, &grid)?);
        }

        if self.cfg.spectral.projector {
            let p = Projector::new(sys, scale)?;
            out.push(
                CheckReport::scalar("projector_truncation", p.tail_bound(), TRUNCATION_TAIL)
                    .with_meta("radius", p.radius()),
            );
            let f = ScalarField::exp_linear(C64::new(0.3, -0.2), C64::new(0.3, 0.2), C64::new(-0.13, 0.0))
                .product(&ScalarField::gaussian_monomial(0, 0, 1.0));
            let targets: Vec<C64> = Grid::square(1.0, 3).points().collect();
            let (idem, cross) = p.idempotence(&f, kmax, &targets)?;
            out.push(idem);
            out.push(cross);
        }

        let mut r = rng(self.cfg.seed, 3);
        let mut parts = Vec::new();
        for _ in 0..10 {
            let g = random_motion(&mut r);
            let pairs: Vec<(C64, C64)> = (0..3).map(|_| (random_point(&mut r, 1.5), random_point(&mut r, 1.5))).collect();
            for k in 0..=kmax {
                parts.push(kernel_invariance_residual(sys, k, &g, &pairs, scale)?);
            }
        }
        out.push(CheckReport::combine("kernel_invariance", 1e-8, &parts));
        Ok(out)
    }

    fn highdim(&self) -> Result<Vec<CheckReport>> {
        let mut out = vec![self.one_dimension()?, self.landau_reduction()?];
        let Some(hd) = &self.cfg.highdim else {
            return Ok(out);
        };
        for case in &hd.cases {
            let tau = EquivariantMapN::new(case.n, case.tau.clone())?;
            let grid = GridN::new(case.n, hd.radius, hd.per_axis)?;
            if let Some(rho) = tau.declared_rho() {
                let rep = equivariance_check_n(&tau, &rho, 50, self.cfg.seed)?;
                out.push(labelled(rep, format!("highdim_equivariance[{}]", case.name)));
            }
            let v = constant_field_test(&tau, case.nu, case.mu, &grid, hd.tol)?;
            let expect = [case.expect.per_component, case.expect.direct, case.expect.agreement];
            for (rep, exp) in v.reports().into_iter().zip(expect) {
                let name = format!("{}[{}]", rep.name, case.name);
                let rep = labelled(rep, name).with_meta("expected_verdict", exp);
                out.push(if exp { rep } else { rep.expecting_failure() });
            }
        }
        Ok(out)
    }

    /// The `n = 1` layer against the planar potential and field.
    fn one_dimension(&self) -> Result<CheckReport> {
        let sys = self.sys;
        let affine = sys
            .tau()
            .affine()
            .ok_or_else(|| MafError::InvalidInput("τ is not affine; no n = 1 counterpart".into()))?;
        let tau = EquivariantMapN::from_affine(&affine)?;
        let theta = sys.potential();
        let mut acc = Residuals::new();
        for z in Grid::square(1.5, 5).points() {
            let p: PointN = PointN::from_element(1, z);
            let pot = potential_n(&tau, sys.nu(), sys.mu(), &p)?;
            acc.push((pot.dz[0] - theta.coeff_dz.eval(z)).norm());
            acc.push((pot.dzbar[0] - theta.coeff_dzbar.eval(z)).norm());
            acc.push((two_form_coeffs(&tau, sys.nu(), sys.mu(), &p)?.dz_dzbar[(0, 0)] - sys.b()).norm());
        }
        Ok(acc.report("highdim_n1_consistency", 1e-9))
    }

    /// The mixed Laplacian at `μ = 0` against the Landau operator.
    fn landau_reduction(&self) -> Result<CheckReport> {
        let nu = self.cfg.nu;
        let flat = MagneticSystem::landau(nu)?;
        let mut r = rng(self.cfg.seed, 4);
        let mut acc = Residuals::new();
        for _ in 0..5 {
            let p = random_point(&mut r, 0.5);
            let q = random_point(&mut r, 0.5);
            let f = self.fd(
                ScalarField::exp_linear(p, q, C64::new(0.0, 0.0))
                    .product(&ScalarField::gaussian_monomial(r.gen_range(0..3), r.gen_range(0..3), 0.5)),
            );
            for z in Grid::square(1.5, 7).points() {
                acc.push((flat.apply_mixed_laplacian(&f, z)? - apply_landau(nu, &f, z)?).norm());
            }
        }
        Ok(acc.report("landau_reduction", 1e-8).with_meta("nu", nu))
    }
}

/// Pretty JSON array.
pub fn to_json(reports: &[CheckReport]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(reports)?;
    s.push('\n');
    Ok(s)
}

/// CSV with columns `name,max_residual,mean_residual,tol,pass,expected_pass`.
pub fn to_csv(reports: &[CheckReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "max_residual", "mean_residual", "tol", "pass", "expected_pass"])?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            format!("{:e}", r.max_residual),
            format!("{:e}", r.mean_residual),
            format!("{:e}", r.tol),
            r.pass.to_string(),
            r.expected_pass.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| MafError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the reports to `out`, or stdout when `None`.
pub fn emit(reports: &[CheckReport], format: Format, out: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Json => to_json(reports)?,
        Format::Csv => to_csv(reports)?,
    };
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
