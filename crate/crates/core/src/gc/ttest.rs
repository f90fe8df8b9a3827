use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// H1: mean > 0.
    #[default]
    Greater,
    /// H1: mean != 0.
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub t: f64,
    pub p: f64,
}

/// One-sample t-test of mean zero. `None` with fewer than two samples.
///
/// Zero sample variance is resolved by the sign of the mean: a positive mean
/// gives `t = +inf, p = 0`, a zero mean `t = 0, p = 1`, a negative mean
/// `t = -inf` with `p = 1` (one-sided) or `p = 0` (two-sided).
pub fn one_sample_t_test(samples: &[f64], alternative: Alternative) -> Option<TTest> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 {
        let (t, p) = if mean > 0.0 {
            (f64::INFINITY, 0.0)
        } else if mean == 0.0 {
            (0.0, 1.0)
        } else {
            let p = match alternative {
                Alternative::Greater => 1.0,
                Alternative::TwoSided => 0.0,
            };
            (f64::NEG_INFINITY, p)
        };
        return Some(TTest { n, mean, sd, t, p });
    }
    let t = mean / (sd / nf.sqrt());
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0).expect("valid degrees of freedom");
    let p = match alternative {
        Alternative::Greater => dist.sf(t),
        Alternative::TwoSided => 2.0 * dist.sf(t.abs()),
    };
    Some(TTest {
        n,
        mean,
        sd,
        t,
        p: p.clamp(0.0, 1.0),
    })
}
