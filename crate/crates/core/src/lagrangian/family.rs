use std::fmt;
use std::sync::Arc;

/// Raw first-order jet: `(t, q, qdot, qddot, δq_out, δq̇_out)`.
pub type JetFn = Arc<dyn Fn(f64, &[f64], &[f64], &[f64], &mut [f64], &mut [f64]) + Send + Sync>;

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Time reparametrisation `g(t)` of a time-shift family `q(t + λ g(t))`.
#[derive(Clone)]
pub enum Warp {
    /// `g(t) = e^{rate·t}`
    Exp { rate: f64 },
    /// `g(t) = coeff · t^exponent`
    Power { coeff: f64, exponent: f64 },
    /// User-supplied `g` and its derivative.
    Custom {
        label: String,
        g: ScalarMap,
        dg: ScalarMap,
    },
}

impl Warp {
    pub fn custom(
        label: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Warp::Custom {
            label: label.into(),
            g: Arc::new(g),
            dg: Arc::new(dg),
        }
    }

    /// `(g(t), g'(t))`
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            Warp::Exp { rate } => {
                let e = (rate * t).exp();
                (e, rate * e)
            }
            Warp::Power { coeff, exponent } => {
                if *exponent == 0.0 {
                    (*coeff, 0.0)
                } else {
                    (
                        coeff * t.powf(*exponent),
                        coeff * exponent * t.powf(exponent - 1.0),
                    )
                }
            }
            Warp::Custom { g, dg, .. } => (g(t), dg(t)),
        }
    }
}

impl fmt::Debug for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warp::Exp { rate } => write!(f, "exp({rate}*t)"),
            Warp::Power { coeff, exponent } => write!(f, "{coeff}*t^{exponent}"),
            Warp::Custom { label, .. } => f.write_str(label),
        }
    }
}

enum FieldKind {
    Null,
    TimeShift(Warp),
    Scaling { alpha: Vec<f64>, beta: f64 },
    Raw { label: String, jet: JetFn },
    Sum(VariationField, VariationField),
}

/// First-order jet `(δq, δq̇)` of a family of perturbed motions.
///
/// Cloning is cheap and clones share identity, which is how a trajectory
/// finds the quadrature channel registered for a field.
#[derive(Clone)]
pub struct VariationField {
    kind: Arc<FieldKind>,
}

impl VariationField {
    fn from_kind(kind: FieldKind) -> Self {
        Self {
            kind: Arc::new(kind),
        }
    }

    /// `δq ≡ 0`.
    pub fn null() -> Self {
        Self::from_kind(FieldKind::Null)
    }

    /// `q_λ(t) = q(t + λ g(t))`: `δq = g q̇`, `δq̇ = g' q̇ + g q̈`.
    pub fn time_shift(warp: Warp) -> Self {
        Self::from_kind(FieldKind::TimeShift(warp))
    }

    /// `q_λ(t) = diag(e^{α λ}) q(e^{β λ} t)`:
    /// `δq_i = α_i q_i + β t q̇_i`, `δq̇_i = α_i q̇_i + β (q̇_i + t q̈_i)`.
    pub fn scaling(alpha: Vec<f64>, beta: f64) -> Self {
        Self::from_kind(FieldKind::Scaling { alpha, beta })
    }

    pub fn raw(
        label: impl Into<String>,
        jet: impl Fn(f64, &[f64], &[f64], &[f64], &mut [f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self::from_kind(FieldKind::Raw {
            label: label.into(),
            jet: Arc::new(jet),
        })
    }

    /// Pointwise sum of two jets.
    pub fn sum(a: VariationField, b: VariationField) -> Self {
        Self::from_kind(FieldKind::Sum(a, b))
    }

    pub fn is_null(&self) -> bool {
        matches!(*self.kind, FieldKind::Null)
    }

    /// True when both handles come from the same constructor call.
    pub fn same_as(&self, other: &VariationField) -> bool {
        Arc::ptr_eq(&self.kind, &other.kind)
    }

    pub fn descriptor(&self) -> String {
        match &*self.kind {
            FieldKind::Null => "null".to_string(),
            FieldKind::TimeShift(w) => format!("time-shift(g={w})"),
            FieldKind::Scaling { alpha, beta } => {
                let a: Vec<String> = alpha.iter().map(|x| x.to_string()).collect();
                format!("scaling(alpha=[{}], beta={beta})", a.join(","))
            }
            FieldKind::Raw { label, .. } => format!("raw({label})"),
            FieldKind::Sum(a, b) => format!("{} + {}", a.descriptor(), b.descriptor()),
        }
    }

    /// Writes `δq` and `δq̇` at a point of a trajectory.
    pub fn jet(
        &self,
        t: f64,
        q: &[f64],
        qdot: &[f64],
        qddot: &[f64],
        dq: &mut [f64],
        dqdot: &mut [f64],
    ) {
        match &*self.kind {
            FieldKind::Null => {
                dq.fill(0.0);
                dqdot.fill(0.0);
            }
            FieldKind::TimeShift(warp) => {
                let (g, dg) = warp.eval(t);
                for i in 0..q.len() {
                    dq[i] = g * qdot[i];
                    dqdot[i] = dg * qdot[i] + g * qddot[i];
                }
            }
            FieldKind::Scaling { alpha, beta } => {
                for i in 0..q.len() {
                    let a = alpha.get(i).copied().unwrap_or(0.0);
                    dq[i] = a * q[i] + beta * t * qdot[i];
                    dqdot[i] = a * qdot[i] + beta * (qdot[i] + t * qddot[i]);
                }
            }
            FieldKind::Raw { jet, .. } => jet(t, q, qdot, qddot, dq, dqdot),
            FieldKind::Sum(a, b) => {
                let n = q.len();
                let mut dq_b = vec![0.0; n];
                let mut dqdot_b = vec![0.0; n];
                a.jet(t, q, qdot, qddot, dq, dqdot);
                b.jet(t, q, qdot, qddot, &mut dq_b, &mut dqdot_b);
                for i in 0..n {
                    dq[i] += dq_b[i];
                    dqdot[i] += dqdot_b[i];
                }
            }
        }
    }
}

impl fmt::Debug for VariationField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("VariationField")
            .field(&self.descriptor())
            .finish()
    }
}
