//! Time integration of lifted fields, the dressing-method group ODE, the
//! zero-curvature checker, and the infinitesimal word criterion.
//!
//! Two integrators are provided: fixed-step classical RK4 (kept for
//! convergence-order checks) and adaptive Dormand-Prince 5(4), the default.
//! Group-valued ODEs are solved in the ambient matrix space with per-step
//! determinant renormalization.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IntegrationFailure, IntegrationFailureKind, Result};
use crate::freelie::{commutator_ideal_basis, evaluate, BracketContext};
use crate::liealg::{is_central, standard_basis, GroupElement, LieElement};
use crate::pvf::{lift, promote, pvf_bracket_numeric_scheme, FdScheme, LiftedField, Pvf};

/// JSON schema identifier stamped on every report.
pub const REPORT_SCHEMA: &str = "zccflows/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4Fixed,
    Dp54Adaptive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Step size for the fixed-step method.
    pub step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Renormalize the determinant along group ODEs.
    pub group_projection: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Dp54Adaptive,
            step: 1e-3,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            group_projection: true,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4Fixed,
            step,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid("step must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if self.max_steps < 1 {
            return Err(Error::invalid("max_steps must be >= 1"));
        }
        Ok(())
    }
}

type Raw = Vec<DMatrix<f64>>;

fn raw_is_finite(y: &Raw) -> bool {
    y.iter().all(|m| m.iter().all(|x| x.is_finite()))
}

/// `base + h * sum(c_i * k_i)` component-wise.
fn raw_combine(base: &Raw, h: f64, terms: &[(f64, &Raw)]) -> Raw {
    let mut out = base.clone();
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for (o, m) in out.iter_mut().zip(k.iter()) {
            *o += m * (h * c);
        }
    }
    out
}

/// Decimating sample buffer for partial trajectories attached to errors.
struct Recorder {
    samples: Vec<(f64, Raw)>,
    stride: usize,
    seen: usize,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            samples: Vec::new(),
            stride: 1,
            seen: 0,
        }
    }

    fn push(&mut self, t: f64, y: &Raw) {
        if self.seen % self.stride == 0 {
            self.samples.push((t, y.clone()));
            if self.samples.len() > 512 {
                let mut keep = Vec::with_capacity(257);
                for (i, s) in self.samples.drain(..).enumerate() {
                    if i % 2 == 0 {
                        keep.push(s);
                    }
                }
                self.samples = keep;
                self.stride *= 2;
            }
        }
        self.seen += 1;
    }
}

fn integration_error(
    kind: IntegrationFailureKind,
    t: f64,
    steps: usize,
    rec: Recorder,
) -> Error {
    Error::Integration(Box::new(IntegrationFailure {
        kind,
        time_reached: t,
        steps_taken: steps,
        partial: rec.samples,
    }))
}

/// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (the last tableau row).
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Error weights `b5 - b4`.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` over raw matrix states.
/// `post_step` runs after every accepted step (determinant renormalization
/// for group ODEs).
fn integrate(
    f: &dyn Fn(f64, &Raw) -> Result<Raw>,
    t0: f64,
    t1: f64,
    y0: Raw,
    cfg: &IntegratorConfig,
    mut post_step: Option<&mut dyn FnMut(&mut Raw) -> Result<()>>,
) -> Result<Raw> {
    cfg.validate()?;
    if !raw_is_finite(&y0) {
        return Err(Error::NonFinite("initial state".into()));
    }
    if t0 == t1 {
        return Ok(y0);
    }
    let span = t1 - t0;
    let total = span.abs();
    let dir = span.signum();
    let mut rec = Recorder::new();
    rec.push(t0, &y0);

    match cfg.method {
        Method::Rk4Fixed => {
            let n_steps = (total / cfg.step).ceil().max(1.0);
            if n_steps > cfg.max_steps as f64 {
                return Err(integration_error(
                    IntegrationFailureKind::MaxStepsExceeded,
                    t0,
                    0,
                    rec,
                ));
            }
            let n_steps = n_steps as usize;
            let h = span / n_steps as f64;
            let mut y = y0;
            let mut t = t0;
            for step in 0..n_steps {
                let k1 = f(t, &y)?;
                let k2 = f(t + 0.5 * h, &raw_combine(&y, h, &[(0.5, &k1)]))?;
                let k3 = f(t + 0.5 * h, &raw_combine(&y, h, &[(0.5, &k2)]))?;
                let k4 = f(t + h, &raw_combine(&y, h, &[(1.0, &k3)]))?;
                y = raw_combine(
                    &y,
                    h / 6.0,
                    &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)],
                );
                t = t0 + h * (step + 1) as f64;
                if let Some(post) = post_step.as_mut() {
                    post(&mut y)?;
                }
                if !raw_is_finite(&y) {
                    return Err(integration_error(
                        IntegrationFailureKind::NonFiniteState,
                        t,
                        step + 1,
                        rec,
                    ));
                }
                rec.push(t, &y);
            }
            Ok(y)
        }
        Method::Dp54Adaptive => {
            let mut y = y0;
            let mut tau = 0.0_f64; // progress in |t - t0|
            let mut h = (total / 100.0).min(total);
            let mut steps = 0usize;
            let entries: usize = y.iter().map(|m| m.len()).sum();
            while tau < total * (1.0 - 1e-15) {
                if steps >= cfg.max_steps {
                    return Err(integration_error(
                        IntegrationFailureKind::MaxStepsExceeded,
                        t0 + dir * tau,
                        steps,
                        rec,
                    ));
                }
                if h < total * 1e-14 {
                    return Err(integration_error(
                        IntegrationFailureKind::StepSizeUnderflow,
                        t0 + dir * tau,
                        steps,
                        rec,
                    ));
                }
                h = h.min(total - tau);
                let hs = dir * h;
                let t = t0 + dir * tau;

                let mut stages: Vec<Raw> = Vec::with_capacity(7);
                stages.push(f(t, &y)?);
                for i in 1..7 {
                    let terms: Vec<(f64, &Raw)> = DP_A[i][..i]
                        .iter()
                        .zip(stages.iter())
                        .map(|(c, k)| (*c, k))
                        .collect();
                    let yi = raw_combine(&y, hs, &terms);
                    stages.push(f(t + DP_C[i] * hs, &yi)?);
                }
                let b_terms: Vec<(f64, &Raw)> = DP_B5
                    .iter()
                    .zip(stages.iter())
                    .map(|(c, k)| (*c, k))
                    .collect();
                let y_next = raw_combine(&y, hs, &b_terms);
                let e_terms: Vec<(f64, &Raw)> = DP_E
                    .iter()
                    .zip(stages.iter())
                    .map(|(c, k)| (*c, k))
                    .collect();
                let err_vec = raw_combine(&vec_zero_like(&y), hs, &e_terms);

                let mut sum_sq = 0.0;
                for ((e, y_old), y_new) in err_vec.iter().zip(&y).zip(&y_next) {
                    for ((ev, ov), nv) in e.iter().zip(y_old.iter()).zip(y_new.iter()) {
                        let scale = cfg.abs_tol + cfg.rel_tol * ov.abs().max(nv.abs());
                        sum_sq += (ev / scale).powi(2);
                    }
                }
                let err_norm = (sum_sq / entries.max(1) as f64).sqrt();
                steps += 1;

                if err_norm <= 1.0 || !err_norm.is_finite() {
                    if !err_norm.is_finite() || !raw_is_finite(&y_next) {
                        return Err(integration_error(
                            IntegrationFailureKind::NonFiniteState,
                            t0 + dir * tau,
                            steps,
                            rec,
                        ));
                    }
                    y = y_next;
                    tau += h;
                    if let Some(post) = post_step.as_mut() {
                        post(&mut y)?;
                    }
                    rec.push(t0 + dir * tau, &y);
                    let factor = if err_norm == 0.0 {
                        5.0
                    } else {
                        (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= factor;
                } else {
                    h *= (0.9 * err_norm.powf(-0.2)).clamp(0.2, 1.0);
                }
            }
            Ok(y)
        }
    }
}

fn vec_zero_like(y: &Raw) -> Raw {
    y.iter()
        .map(|m| DMatrix::zeros(m.nrows(), m.ncols()))
        .collect()
}

fn unwrap_state(state: &[LieElement]) -> Raw {
    state.iter().map(|e| e.matrix().clone()).collect()
}

fn rewrap_state(raw: Raw, template: &[LieElement]) -> Result<Vec<LieElement>> {
    raw.into_iter()
        .zip(template)
        .map(|(m, t)| LieElement::new(m, t.tag()))
        .collect()
}

/// Numerical solution of `dX/dt = field(X)` at the requested time.
pub fn flow(
    field: &LiftedField,
    state0: &[LieElement],
    time: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<LieElement>> {
    if state0.len() != field.n_components() {
        return Err(Error::ArityMismatch {
            expected: field.n_components(),
            found: state0.len(),
        });
    }
    let template = state0.to_vec();
    let f = |_t: f64, y: &Raw| -> Result<Raw> {
        let state = rewrap_state(y.clone(), &template)?;
        Ok(unwrap_state(&field.eval(&state)?))
    };
    let raw = integrate(&f, 0.0, time, unwrap_state(state0), cfg, None)?;
    rewrap_state(raw, state0)
}

/// Integrate through a sorted list of output times (starting from time 0),
/// returning the state at each.
pub fn flow_trajectory(
    field: &LiftedField,
    state0: &[LieElement],
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, Vec<LieElement>)>> {
    let mut out = Vec::with_capacity(times.len());
    let mut current = state0.to_vec();
    let mut t_prev = 0.0;
    for &t in times {
        if t < t_prev {
            return Err(Error::invalid("output times must be non-decreasing"));
        }
        if t > t_prev {
            let template = current.clone();
            let f = |_t: f64, y: &Raw| -> Result<Raw> {
                let state = rewrap_state(y.clone(), &template)?;
                Ok(unwrap_state(&field.eval(&state)?))
            };
            let raw = integrate(&f, t_prev, t, unwrap_state(&current), cfg, None)?;
            current = rewrap_state(raw, &template)?;
        }
        out.push((t, current.clone()));
        t_prev = t;
    }
    Ok(out)
}

/// Solve the group ODE `d sigma/ds = A(s) sigma` with `A` the coefficient
/// path, renormalizing the determinant after each accepted step when
/// `group_projection` is set.
pub fn dressing_solve(
    coefficient_path: &dyn Fn(f64) -> Result<LieElement>,
    time: f64,
    initial: &GroupElement,
    cfg: &IntegratorConfig,
) -> Result<GroupElement> {
    let n = initial.dim();
    let f = |t: f64, y: &Raw| -> Result<Raw> {
        let a = coefficient_path(t)?;
        if a.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.dim(),
            });
        }
        Ok(vec![a.matrix() * &y[0]])
    };
    let mut renorm = |y: &mut Raw| -> Result<()> {
        let det = y[0].determinant();
        if !(det > 0.0) {
            return Err(Error::Invariant(format!(
                "group state determinant {det:e} not positive"
            )));
        }
        y[0] /= det.powf(1.0 / n as f64);
        Ok(())
    };
    let post: Option<&mut dyn FnMut(&mut Raw) -> Result<()>> = if cfg.group_projection {
        Some(&mut renorm)
    } else {
        None
    };
    let raw = integrate(
        &f,
        0.0,
        time,
        vec![initial.matrix().clone()],
        cfg,
        post,
    )?;
    GroupElement::new(raw.into_iter().next().expect("one component"), crate::liealg::GroupTag::SpecialLinear)
}

/// Record of a flow or zero-curvature experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowReport {
    pub schema: String,
    pub experiment: String,
    /// Resolved inputs, serialized.
    pub inputs: serde_json::Value,
    pub grid: Vec<[f64; 2]>,
    pub defect_norms: Vec<f64>,
    pub max_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub failure: Option<String>,
    pub details: serde_json::Value,
    /// Filled by the caller; excluded from determinism comparisons.
    pub wall_time_ms: f64,
}

impl FlowReport {
    pub fn new(experiment: impl Into<String>, tolerance: f64) -> Self {
        FlowReport {
            schema: REPORT_SCHEMA.to_string(),
            experiment: experiment.into(),
            inputs: serde_json::Value::Null,
            grid: Vec::new(),
            defect_norms: Vec::new(),
            max_defect: 0.0,
            tolerance,
            pass: false,
            failure: None,
            details: serde_json::Value::Null,
            wall_time_ms: 0.0,
        }
    }

    /// Recompute `max_defect` and `pass` from the recorded defects.
    pub fn finish(&mut self) {
        self.max_defect = self.defect_norms.iter().copied().fold(0.0, f64::max);
        self.pass = self.failure.is_none() && self.max_defect <= self.tolerance;
    }
}

pub fn matrix_json(x: &LieElement) -> serde_json::Value {
    serde_json::json!(x.to_rows())
}

/// Defect of the zero-curvature condition for the pair `(a, b)` under the
/// order-1 field `xi`: flows the lifted promotions in both orders from
/// `(a, b, y)` for each probe `y` and takes the worst Frobenius distance
/// over all three state components.
#[allow(clippy::too_many_arguments)]
pub fn zcc_check(
    xi: &Pvf,
    a: &LieElement,
    b: &LieElement,
    probes: &[LieElement],
    s: f64,
    t: f64,
    tol: f64,
    cfg: &IntegratorConfig,
) -> Result<FlowReport> {
    if probes.is_empty() {
        return Err(Error::EmptyProbes);
    }
    let field1 = lift(&promote(xi, 1)?);
    let field2 = lift(&promote(xi, 2)?);

    let mut report = FlowReport::new("zcc-check", tol);
    report.grid = vec![[s, t]];
    report.inputs = serde_json::json!({
        "a": matrix_json(a),
        "b": matrix_json(b),
        "s": s,
        "t": t,
        "probes": probes.iter().map(matrix_json).collect::<Vec<_>>(),
        "integrator": cfg,
    });

    let mut per_probe = Vec::new();
    for probe in probes {
        let state = vec![a.clone(), b.clone(), probe.clone()];
        // Phi^1_s Phi^2_t versus Phi^2_t Phi^1_s.
        let order_a = flow(&field2, &state, t, cfg).and_then(|m| flow(&field1, &m, s, cfg));
        let order_b = flow(&field1, &state, s, cfg).and_then(|m| flow(&field2, &m, t, cfg));
        match (order_a, order_b) {
            (Ok(end_a), Ok(end_b)) => {
                let defect = end_a
                    .iter()
                    .zip(&end_b)
                    .map(|(x, y)| x.distance(y))
                    .fold(0.0_f64, f64::max);
                report.defect_norms.push(defect);
                per_probe.push(serde_json::json!({
                    "probe": matrix_json(probe),
                    "defect": defect,
                }));
            }
            (Err(Error::Integration(fail)), _) | (_, Err(Error::Integration(fail))) => {
                report.failure = Some(format!(
                    "integration failed: {} at t = {}",
                    fail.kind, fail.time_reached
                ));
                break;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    report.details = serde_json::json!({ "per_probe": per_probe });
    report.finish();
    Ok(report)
}

/// Noise-balanced difference step for a bracket whose operands carry
/// `level - 1` nested difference levels below, starting from f64 roundoff.
/// Central differences (truncation h^2 against noise/h) balance at
/// h ~ noise^(1/3), leaving noise^(2/3); the Richardson scheme (truncation
/// h^4) balances at h ~ noise^(1/5), leaving noise^(4/5).
pub fn fd_step_for_level(level: usize, scheme: FdScheme) -> f64 {
    let (decay, root) = match scheme {
        FdScheme::Central => (2.0_f64 / 3.0, 3.0),
        FdScheme::Richardson => (4.0_f64 / 5.0, 5.0),
    };
    let exponent = -16.0 * decay.powi(level as i32 - 1) / root;
    10.0_f64.powf(exponent)
}

fn word_pvf(
    tree: &crate::freelie::LyndonTree,
    xi1: &Pvf,
    xi2: &Pvf,
    scheme: FdScheme,
) -> Result<(Pvf, usize)> {
    match tree.children() {
        None => Ok((
            if tree.word()[0] == 1 {
                xi1.clone()
            } else {
                xi2.clone()
            },
            0,
        )),
        Some((l, r)) => {
            let (left, hl) = word_pvf(l, xi1, xi2, scheme)?;
            let (right, hr) = word_pvf(r, xi1, xi2, scheme)?;
            let level = hl.max(hr) + 1;
            let bracket = pvf_bracket_numeric_scheme(
                &left,
                &right,
                fd_step_for_level(level, scheme),
                scheme,
            )?;
            Ok((bracket, level))
        }
    }
}

/// Evaluate every commutator-ideal word of degree at most `max_degree` in
/// the promotions of `xi`, at `(a, b, z)` for each probe `z`, two ways:
/// numerically via nested finite-difference brackets, and (for Lax fields)
/// analytically via the reduction of the word to `[w(a, b)_+, z]`. The pass
/// verdict uses the analytic magnitudes when available.
pub fn word_criterion_check(
    xi: &Pvf,
    a: &LieElement,
    b: &LieElement,
    probes: &[LieElement],
    max_degree: usize,
    tol: f64,
) -> Result<FlowReport> {
    word_criterion_check_scheme(xi, a, b, probes, max_degree, tol, FdScheme::Central)
}

/// [`word_criterion_check`] with an explicit difference scheme for the
/// numeric path.
#[allow(clippy::too_many_arguments)]
pub fn word_criterion_check_scheme(
    xi: &Pvf,
    a: &LieElement,
    b: &LieElement,
    probes: &[LieElement],
    max_degree: usize,
    tol: f64,
    scheme: FdScheme,
) -> Result<FlowReport> {
    if probes.is_empty() {
        return Err(Error::EmptyProbes);
    }
    if max_degree < 2 {
        return Err(Error::invalid("max_degree must be >= 2"));
    }
    let xi1 = promote(xi, 1)?;
    let xi2 = promote(xi, 2)?;
    let lax = xi.lax_source();
    let ctx = BracketContext::matrix();
    let basis = standard_basis(a.dim(), a.tag());

    let mut report = FlowReport::new("word-criterion", tol);
    report.inputs = serde_json::json!({
        "a": matrix_json(a),
        "b": matrix_json(b),
        "max_degree": max_degree,
        "probes": probes.iter().map(matrix_json).collect::<Vec<_>>(),
        "lax": lax.is_some(),
    });

    let mut rows = Vec::new();
    for tree in commutator_ideal_basis(2, max_degree)? {
        let (numeric_field, _) = word_pvf(&tree, &xi1, &xi2, scheme)?;
        let mut numeric_max = 0.0_f64;
        for z in probes {
            let value = numeric_field.eval(&[a.clone(), b.clone()], z)?;
            numeric_max = numeric_max.max(value.frobenius_norm());
        }

        let mut row = serde_json::json!({
            "word": tree.word_string(),
            "degree": tree.degree(),
            "numeric_max": numeric_max,
        });
        let governing = match lax {
            Some(src) => {
                // w(xi^1, xi^2)(a, b, z) = [w(a, b)_+, z].
                let w_ab = evaluate(&tree, &[a.clone(), b.clone()], &ctx)?;
                let w_plus = src.splitting.plus(&w_ab);
                let central = is_central(&w_plus, &basis, tol)?;
                let mut analytic_max = 0.0_f64;
                for z in probes {
                    analytic_max = analytic_max.max(w_plus.bracket(z)?.frobenius_norm());
                }
                row["analytic_max"] = serde_json::json!(analytic_max);
                row["plus_part_central"] = serde_json::json!(central);
                row["cross_defect"] = serde_json::json!((numeric_max - analytic_max).abs());
                analytic_max
            }
            None => numeric_max,
        };
        report.defect_norms.push(governing);
        rows.push(row);
    }
    report.details = serde_json::json!({ "words": rows });
    report.finish();
    Ok(report)
}

/// Endpoints of the joint flow of `(a, b, c)` along both path orders.
#[derive(Debug, Clone)]
pub struct CommutingRun {
    /// Endpoint of (0,0) -> (s,0) -> (s,t).
    pub state_s_then_t: Vec<LieElement>,
    /// Endpoint of (0,0) -> (0,t) -> (s,t).
    pub state_t_then_s: Vec<LieElement>,
}

impl CommutingRun {
    /// The transported `c` along the canonical path.
    pub fn c(&self) -> &LieElement {
        &self.state_s_then_t[2]
    }

    /// Worst component distance between the two path orders.
    pub fn path_defect(&self) -> f64 {
        self.state_s_then_t
            .iter()
            .zip(&self.state_t_then_s)
            .map(|(x, y)| x.distance(y))
            .fold(0.0, f64::max)
    }
}

/// Integrate the coupled system for `(a, b, c)` to `(s, t)` along both path
/// orders.
pub fn commuting_solve(
    xi: &Pvf,
    a: &LieElement,
    b: &LieElement,
    c: &LieElement,
    s: f64,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<CommutingRun> {
    let field1 = lift(&promote(xi, 1)?);
    let field2 = lift(&promote(xi, 2)?);
    let state = vec![a.clone(), b.clone(), c.clone()];
    let s_then_t = flow(&field2, &flow(&field1, &state, s, cfg)?, t, cfg)?;
    let t_then_s = flow(&field1, &flow(&field2, &state, t, cfg)?, s, cfg)?;
    Ok(CommutingRun {
        state_s_then_t: s_then_t,
        state_t_then_s: t_then_s,
    })
}

/// Coefficients `[c_0, ..., c_{n-1}]` of the characteristic polynomial
/// `lambda^n + c_{n-1} lambda^{n-1} + ... + c_0`, by the Faddeev-LeVerrier
/// recursion. The eigenvalue multiset is constant along conjugation flows,
/// so these coefficients are a strong integration check.
pub fn char_poly_coeffs(x: &LieElement) -> Vec<f64> {
    let n = x.dim();
    let a = x.matrix();
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let mut ck = 1.0;
    let mut out = vec![0.0; n];
    for k in 1..=n {
        let mut shifted = mk.clone();
        for i in 0..n {
            shifted[(i, i)] += ck;
        }
        mk = a * shifted;
        ck = -mk.trace() / k as f64;
        out[n - k] = ck;
    }
    out
}
