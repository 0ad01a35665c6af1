//! PID-like Mamdani fuzzy controller: triangular memberships, min-max
//! inference and three defuzzifiers.

use serde::{Deserialize, Serialize};

use super::pid::PidState;
use crate::error::{Error, Result};

pub const SET_COUNT: usize = 7;
/// Points on the output universe used by the centroid and MOM defuzzifiers.
pub const GRID_POINTS: usize = 1001;
const GRID_HALF: usize = GRID_POINTS / 2;
const PLATEAU_TOL: f64 = 1e-12;

pub type Degrees = [f64; SET_COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FuzzyLabel {
    NB,
    NM,
    NS,
    Z,
    PS,
    PM,
    PB,
}

impl FuzzyLabel {
    pub const ALL: [FuzzyLabel; SET_COUNT] = [
        FuzzyLabel::NB,
        FuzzyLabel::NM,
        FuzzyLabel::NS,
        FuzzyLabel::Z,
        FuzzyLabel::PS,
        FuzzyLabel::PM,
        FuzzyLabel::PB,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn mirror(self) -> Self {
        Self::ALL[SET_COUNT - 1 - self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triangle {
    pub left: f64,
    pub peak: f64,
    pub right: f64,
}

impl Triangle {
    pub fn degree(&self, x: f64) -> f64 {
        if x == self.peak {
            1.0
        } else if x < self.peak {
            if x <= self.left {
                0.0
            } else {
                (x - self.left) / (self.peak - self.left)
            }
        } else if x >= self.right {
            0.0
        } else {
            (self.right - x) / (self.right - self.peak)
        }
    }
}

/// Seven triangles ordered NB..PB on the normalized universe [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MembershipFamily {
    pub sets: [Triangle; SET_COUNT],
}

impl Default for MembershipFamily {
    /// Evenly spaced peaks at multiples of 1/3 with half overlap. The end
    /// sets keep their outer feet beyond the universe so the edges have
    /// full membership.
    fn default() -> Self {
        let width = 1.0 / 3.0;
        let sets = std::array::from_fn(|i| {
            let peak = (i as f64 - 3.0) / 3.0;
            Triangle {
                left: peak - width,
                peak,
                right: peak + width,
            }
        });
        // make the mirror image exact in floating point
        let mut family = MembershipFamily { sets };
        for i in 0..3 {
            let t = family.sets[i];
            family.sets[SET_COUNT - 1 - i] = Triangle {
                left: -t.right,
                peak: -t.peak,
                right: -t.left,
            };
        }
        family
    }
}

impl MembershipFamily {
    pub fn degrees(&self, x: f64) -> Degrees {
        std::array::from_fn(|i| self.sets[i].degree(x))
    }

    pub fn peaks(&self) -> [f64; SET_COUNT] {
        std::array::from_fn(|i| self.sets[i].peak)
    }

    /// Ordered peaks, well-formed triangles and no gaps over [-1, 1].
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.sets.iter().enumerate() {
            if !(t.left < t.peak && t.peak < t.right) || ![t.left, t.peak, t.right].iter().all(|v| v.is_finite()) {
                return Err(Error::param("membership", format!("set {i} is not a proper triangle")));
            }
        }
        for w in self.sets.windows(2) {
            if w[1].peak <= w[0].peak || w[1].left >= w[0].right {
                return Err(Error::param("membership", "sets must be ordered and overlap their neighbours"));
            }
        }
        if self.sets[0].peak > -1.0 && self.sets[0].left >= -1.0
            || self.sets[SET_COUNT - 1].peak < 1.0 && self.sets[SET_COUNT - 1].right <= 1.0
        {
            return Err(Error::param("membership", "sets must cover [-1, 1]"));
        }
        Ok(())
    }
}

/// Consequent label for every (error, error-rate) antecedent pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleTable {
    pub cells: [[FuzzyLabel; SET_COUNT]; SET_COUNT],
}

impl Default for RuleTable {
    /// Diagonal table: consequent index `clamp(i + j - 3, 0, 6)`.
    fn default() -> Self {
        let cells = std::array::from_fn(|i| {
            std::array::from_fn(|j| FuzzyLabel::ALL[(i + j).saturating_sub(3).min(SET_COUNT - 1)])
        });
        RuleTable { cells }
    }
}

impl RuleTable {
    pub fn consequent(&self, e: usize, de: usize) -> FuzzyLabel {
        self.cells[e][de]
    }

    /// Mirroring both antecedents mirrors the consequent.
    pub fn is_antisymmetric(&self) -> bool {
        (0..SET_COUNT).all(|i| {
            (0..SET_COUNT).all(|j| self.cells[SET_COUNT - 1 - i][SET_COUNT - 1 - j] == self.cells[i][j].mirror())
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefuzzMethod {
    #[default]
    Centroid,
    MeanOfMaximum,
    WeightedAverage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Defuzzified {
    pub value: f64,
    /// Set when no rule fired; `value` is then 0.
    pub empty: bool,
}

/// Normalizes by `scale`, clamps to [-1, 1] and evaluates every set.
pub fn fuzzify(value: f64, scale: f64, family: &MembershipFamily) -> Degrees {
    family.degrees((value / scale).clamp(-1.0, 1.0))
}

/// Min for rule firing, max for aggregation per consequent.
pub fn infer(e_deg: &Degrees, de_deg: &Degrees, rules: &RuleTable) -> Degrees {
    let mut agg: Degrees = [0.0; SET_COUNT];
    for (i, a) in e_deg.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        for (j, b) in de_deg.iter().enumerate() {
            let strength = a.min(*b);
            let k = rules.consequent(i, j).index();
            agg[k] = agg[k].max(strength);
        }
    }
    agg
}

fn grid_point(i: usize) -> f64 {
    (i as f64 - GRID_HALF as f64) / GRID_HALF as f64
}

/// Defuzzification with the set membership sampled on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyCore {
    pub family: MembershipFamily,
    pub rules: RuleTable,
    pub method: DefuzzMethod,
    grid: Vec<Degrees>,
}

impl FuzzyCore {
    pub fn new(family: MembershipFamily, rules: RuleTable, method: DefuzzMethod) -> Result<Self> {
        family.validate()?;
        let grid = (0..GRID_POINTS).map(|i| family.degrees(grid_point(i))).collect();
        Ok(FuzzyCore {
            family,
            rules,
            method,
            grid,
        })
    }

    /// Crisp output for inputs already on the normalized universe.
    pub fn evaluate(&self, e: f64, de: f64) -> Defuzzified {
        let agg = infer(&fuzzify(e, 1.0, &self.family), &fuzzify(de, 1.0, &self.family), &self.rules);
        self.defuzzify(&agg)
    }

    fn clipped(&self, agg: &Degrees, i: usize) -> f64 {
        self.grid[i]
            .iter()
            .zip(agg)
            .fold(0.0, |m, (mu, h)| m.max(mu.min(*h)))
    }

    pub fn defuzzify(&self, agg: &Degrees) -> Defuzzified {
        // Sums run over mirrored pairs (y, -y) so that a mirrored aggregate
        // gives exactly the negated result.
        let (num, den) = match self.method {
            DefuzzMethod::WeightedAverage => {
                let peaks = self.family.peaks();
                let mut num = agg[3] * peaks[3];
                let mut den = agg[3];
                for k in 0..3 {
                    let m = SET_COUNT - 1 - k;
                    num += agg[k] * peaks[k] + agg[m] * peaks[m];
                    den += agg[k] + agg[m];
                }
                (num, den)
            }
            DefuzzMethod::Centroid => {
                let mu: Vec<f64> = (0..GRID_POINTS).map(|i| self.clipped(agg, i)).collect();
                let mut num = 0.0;
                let mut den = mu[GRID_HALF];
                for i in 0..GRID_HALF {
                    let j = GRID_POINTS - 1 - i;
                    let w = if i == 0 { 0.5 } else { 1.0 };
                    num += w * (grid_point(i) * mu[i] + grid_point(j) * mu[j]);
                    den += w * (mu[i] + mu[j]);
                }
                (num, den)
            }
            DefuzzMethod::MeanOfMaximum => {
                let mu: Vec<f64> = (0..GRID_POINTS).map(|i| self.clipped(agg, i)).collect();
                let top = mu.iter().fold(0.0f64, |m, v| m.max(*v));
                let on = |v: f64| if top > 0.0 && v >= top - PLATEAU_TOL { 1.0 } else { 0.0 };
                let mut num = 0.0;
                let mut den = on(mu[GRID_HALF]);
                for i in 0..GRID_HALF {
                    let j = GRID_POINTS - 1 - i;
                    num += grid_point(i) * on(mu[i]) + grid_point(j) * on(mu[j]);
                    den += on(mu[i]) + on(mu[j]);
                }
                (num, den)
            }
        };
        if den > 0.0 {
            Defuzzified {
                value: num / den,
                empty: false,
            }
        } else {
            Defuzzified {
                value: 0.0,
                empty: true,
            }
        }
    }
}

/// Controller configuration: gains, input normalization and fuzzy internals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlcConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub ku: f64,
    /// Value of `kp * e` mapped to the edge of the universe.
    #[serde(default = "unit")]
    pub error_scale: f64,
    /// Value of `kd * de/dt` mapped to the edge of the universe.
    #[serde(default = "unit")]
    pub rate_scale: f64,
    #[serde(default)]
    pub method: DefuzzMethod,
    #[serde(default)]
    pub membership: MembershipFamily,
    #[serde(default)]
    pub rules: RuleTable,
}

fn unit() -> f64 {
    1.0
}

impl FlcConfig {
    pub fn reference() -> Self {
        FlcConfig {
            kp: 150.0,
            ki: 1.5,
            kd: 1.0,
            ku: 1.0,
            error_scale: 1.0,
            rate_scale: 1.0,
            method: DefuzzMethod::Centroid,
            membership: MembershipFamily::default(),
            rules: RuleTable::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd), ("ku", self.ku)] {
            if !v.is_finite() {
                return Err(Error::param(field, "must be finite"));
            }
        }
        for (field, v) in [("error_scale", self.error_scale), ("rate_scale", self.rate_scale)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(field, format!("must be > 0, got {v}")));
            }
        }
        if !self.rules.is_antisymmetric() {
            return Err(Error::param("rules", "rule table must be antisymmetric"));
        }
        self.membership.validate()
    }
}

/// Validated fuzzy controller with its sampled membership grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Flc {
    pub config: FlcConfig,
    core: FuzzyCore,
}

impl Flc {
    pub fn new(config: FlcConfig) -> Result<Self> {
        config.validate()?;
        let core = FuzzyCore::new(config.membership, config.rules, config.method)?;
        Ok(Flc { config, core })
    }

    pub fn core(&self) -> &FuzzyCore {
        &self.core
    }

    /// Replaces the gains, keeping the fuzzy internals.
    pub fn set_gains(&mut self, kp: f64, ki: f64, kd: f64, ku: f64) {
        self.config.kp = kp;
        self.config.ki = ki;
        self.config.kd = kd;
        self.config.ku = ku;
    }
}

/// `u = ku * f(kp e, kd de/dt) + ki * integral(e)`, with the same clamped
/// trapezoid integrator as the PID.
pub fn flc_step(flc: &Flc, error: f64, st: &PidState, dt: f64) -> (f64, PidState) {
    let c = &flc.config;
    let next = st.advance(c.ki, error, dt);
    let rate = (error - st.prev_error) / dt;
    let out = flc.core.evaluate(c.kp * error / c.error_scale, c.kd * rate / c.rate_scale);
    (c.ku * out.value + c.ki * next.integral, next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn core(method: DefuzzMethod) -> FuzzyCore {
        FuzzyCore::new(MembershipFamily::default(), RuleTable::default(), method).unwrap()
    }

    const METHODS: [DefuzzMethod; 3] = [
        DefuzzMethod::Centroid,
        DefuzzMethod::MeanOfMaximum,
        DefuzzMethod::WeightedAverage,
    ];

    fn single(label: FuzzyLabel, h: f64) -> Degrees {
        let mut agg = [0.0; SET_COUNT];
        agg[label.index()] = h;
        agg
    }

    #[test]
    fn fuzzify_examples() {
        let fam = MembershipFamily::default();
        assert_eq!(fuzzify(0.0, 1.0, &fam), single(FuzzyLabel::Z, 1.0));
        assert_eq!(fuzzify(7.0, 2.0, &fam), single(FuzzyLabel::PB, 1.0));
        assert_eq!(fuzzify(-1.0, 1.0, &fam), single(FuzzyLabel::NB, 1.0));
        let d = fuzzify(1.0, 6.0, &fam);
        assert!((d[3] - 0.5).abs() < 1e-12 && (d[4] - 0.5).abs() < 1e-12);
        assert_eq!(d.iter().filter(|v| **v > 0.0).count(), 2);
    }

    #[test]
    fn family_covers_universe() {
        let fam = MembershipFamily::default();
        fam.validate().unwrap();
        for i in 0..=2000 {
            let x = -1.0 + i as f64 / 1000.0;
            let total: f64 = fam.degrees(x).iter().sum();
            assert!(total > 0.0 && total <= 2.0 + 1e-12, "x = {x}");
        }
        for i in 0..SET_COUNT {
            assert_eq!(fam.sets[i].peak, -fam.sets[SET_COUNT - 1 - i].peak);
        }
    }

    #[test]
    fn default_rules() {
        let r = RuleTable::default();
        assert!(r.is_antisymmetric());
        assert_eq!(r.consequent(3, 3), FuzzyLabel::Z);
        assert_eq!(r.consequent(6, 6), FuzzyLabel::PB);
        assert_eq!(r.consequent(6, 3), FuzzyLabel::PB);
        assert_eq!(r.consequent(0, 6), FuzzyLabel::Z);
        let mut bad = r;
        bad.cells[0][0] = FuzzyLabel::Z;
        assert!(!bad.is_antisymmetric());
    }

    #[test]
    fn inference_examples() {
        let fam = MembershipFamily::default();
        let rules = RuleTable::default();
        let z = fuzzify(0.0, 1.0, &fam);
        assert_eq!(infer(&z, &z, &rules), single(FuzzyLabel::Z, 1.0));
        let pb = fuzzify(1.0, 1.0, &fam);
        assert_eq!(infer(&pb, &pb, &rules), single(FuzzyLabel::PB, 1.0));

        // e half Z / half PS, de pure Z: rules (Z,Z) -> Z and (PS,Z) -> PS
        let e = fuzzify(1.0 / 6.0, 1.0, &fam);
        let agg = infer(&e, &z, &rules);
        let mut want: Degrees = [0.0; SET_COUNT];
        for (i, a) in e.iter().enumerate() {
            for (j, b) in z.iter().enumerate() {
                let k = rules.consequent(i, j).index();
                want[k] = want[k].max(a.min(*b));
            }
        }
        assert_eq!(agg, want);
        assert!((agg[3] - 0.5).abs() < 1e-12 && (agg[4] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_aggregate_defuzzifies_to_zero() {
        let agg = [0.1, 0.0, 0.4, 0.7, 0.4, 0.0, 0.1];
        for m in METHODS {
            assert_eq!(core(m).defuzzify(&agg).value, 0.0, "{m:?}");
        }
    }

    #[test]
    fn singleton_aggregates() {
        let wa = core(DefuzzMethod::WeightedAverage);
        assert_eq!(wa.defuzzify(&single(FuzzyLabel::PB, 1.0)).value, 1.0);
        let mom = core(DefuzzMethod::MeanOfMaximum);
        assert_eq!(mom.defuzzify(&single(FuzzyLabel::PB, 1.0)).value, 1.0);
        let peaks = MembershipFamily::default().peaks();
        for label in FuzzyLabel::ALL {
            let agg = single(label, 0.6);
            assert!((wa.defuzzify(&agg).value - peaks[label.index()]).abs() < 1e-12);
            if label != FuzzyLabel::NB && label != FuzzyLabel::PB {
                // plateau mean, limited by the grid spacing
                let v = mom.defuzzify(&agg).value;
                assert!((v - peaks[label.index()]).abs() <= 1.0 / GRID_HALF as f64, "{label:?}: {v}");
            }
        }
    }

    #[test]
    fn centroid_of_clipped_triangles() {
        let c = core(DefuzzMethod::Centroid);
        assert_eq!(c.defuzzify(&single(FuzzyLabel::Z, 0.5)).value, 0.0);

        // PS clipped at 0.5 is a symmetric trapezoid about its peak
        let v = c.defuzzify(&single(FuzzyLabel::PS, 0.5)).value;
        assert!((v - 1.0 / 3.0).abs() < 1e-5, "{v}");

        // PB truncated by the universe edge: rising ramp on [2/3, 1]
        let v = c.defuzzify(&single(FuzzyLabel::PB, 1.0)).value;
        assert!((v - 8.0 / 9.0).abs() < 1e-5, "{v}");

        // PB clipped at h: trapezoid from 2/3 rising to h at 2/3 + h/3, flat to 1
        let h = 0.4;
        let a = 2.0 / 3.0;
        let b = a + h / 3.0;
        let area_ramp = 0.5 * h * (b - a);
        let area_flat = h * (1.0 - b);
        let moment = area_ramp * (a + 2.0 * (b - a) / 3.0) + area_flat * 0.5 * (b + 1.0);
        let want = moment / (area_ramp + area_flat);
        let v = c.defuzzify(&single(FuzzyLabel::PB, h)).value;
        assert!((v - want).abs() < 1e-5, "{v} vs {want}");
    }

    #[test]
    fn empty_aggregate_is_flagged() {
        for m in METHODS {
            let d = core(m).defuzzify(&[0.0; SET_COUNT]);
            assert!(d.empty && d.value == 0.0);
        }
    }

    #[test]
    fn odd_symmetry_and_bounds() {
        for m in METHODS {
            let c = core(m);
            assert_eq!(c.evaluate(0.0, 0.0).value, 0.0);
            for i in 0..=40 {
                for j in 0..=40 {
                    let e = -1.2 + 0.06 * i as f64;
                    let de = -1.2 + 0.06 * j as f64;
                    let a = c.evaluate(e, de).value;
                    let b = c.evaluate(-e, -de).value;
                    assert_eq!(a, -b, "{m:?} at ({e}, {de})");
                    assert!(a.abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn step_examples() {
        let mut cfg = FlcConfig::reference();
        let flc = Flc::new(cfg).unwrap();
        let (u, _) = flc_step(&flc, 0.0, &PidState::default(), 0.005);
        assert_eq!(u, 0.0);

        // large error with no rate: the core saturates at PB
        cfg.ki = 0.0;
        let hold = PidState {
            integral: 0.0,
            prev_error: 5.0,
        };
        for (method, want) in [
            (DefuzzMethod::WeightedAverage, 1.0),
            (DefuzzMethod::MeanOfMaximum, 1.0),
            (DefuzzMethod::Centroid, 8.0 / 9.0),
        ] {
            cfg.method = method;
            let flc = Flc::new(cfg).unwrap();
            let (u, _) = flc_step(&flc, 5.0, &hold, 0.005);
            assert!((u - cfg.ku * want).abs() < 1e-5, "{method:?}: {u}");
        }
    }

    #[test]
    fn step_sign_symmetry() {
        let flc = Flc::new(FlcConfig::reference()).unwrap();
        let st = PidState {
            integral: 0.01,
            prev_error: 0.003,
        };
        let mirrored = PidState {
            integral: -0.01,
            prev_error: -0.003,
        };
        for e in [0.0, 0.001, 0.004, 0.02, 0.3] {
            let (a, sa) = flc_step(&flc, e, &st, 0.005);
            let (b, sb) = flc_step(&flc, -e, &mirrored, 0.005);
            assert_eq!(a, -b);
            assert_eq!(sa.integral, -sb.integral);
        }
    }

    #[test]
    fn config_json_defaults() {
        let cfg: FlcConfig = serde_json::from_str(r#"{"kp":150,"ki":1.5,"kd":1,"ku":1}"#).unwrap();
        assert_eq!(cfg, FlcConfig::reference());
        let cfg: FlcConfig =
            serde_json::from_str(r#"{"kp":1,"ki":0,"kd":1,"ku":2,"method":"mean_of_maximum"}"#).unwrap();
        assert_eq!(cfg.method, DefuzzMethod::MeanOfMaximum);
        assert!(serde_json::from_str::<FlcConfig>(r#"{"kp":1,"ki":0,"kd":1,"ku":2,"gain":3}"#).is_err());
        let round = serde_json::to_string(&FlcConfig::reference()).unwrap();
        assert_eq!(serde_json::from_str::<FlcConfig>(&round).unwrap(), FlcConfig::reference());
    }
}
