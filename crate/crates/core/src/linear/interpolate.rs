use crate::data::{Individual, LongitudinalDataset};
use crate::error::Result;

/// Gap-filled copy of a dataset.
#[derive(Debug, Clone)]
pub struct Interpolated {
    pub data: LongitudinalDataset,
    /// `(individual id, variable name)` pairs with no observation at all;
    /// those cells were filled with zero.
    pub flagged: Vec<(String, String)>,
}

/// Fills every unobserved cell: interior gaps linearly against the
/// timestamps, leading and trailing gaps with the nearest observed value.
pub fn interpolate_missing(data: &LongitudinalDataset) -> Result<Interpolated> {
    let mut flagged = Vec::new();
    let mut out = Vec::with_capacity(data.len());
    for ind in data.individuals() {
        let (filled, empty) = interpolate_individual(ind)?;
        for v in empty {
            flagged.push((ind.id().to_string(), data.variable_names()[v].clone()));
        }
        out.push(filled);
    }
    let data = LongitudinalDataset::new(data.variable_names().to_vec(), out)?.with_meta(data.meta.clone());
    Ok(Interpolated { data, flagged })
}

fn interpolate_individual(ind: &Individual) -> Result<(Individual, Vec<usize>)> {
    let (n_t, k) = (ind.n_timepoints(), ind.n_vars());
    let times = ind.times();
    let mut values = vec![0.0; n_t * k];
    let mut empty = Vec::new();
    for v in 0..k {
        let known: Vec<(usize, f64)> = (0..n_t).filter_map(|t| ind.value(t, v).map(|x| (t, x))).collect();
        if known.is_empty() {
            empty.push(v);
            continue;
        }
        let mut next = 0;
        for t in 0..n_t {
            while next < known.len() && known[next].0 < t {
                next += 1;
            }
            let x = match (next.checked_sub(1).map(|i| known[i]), known.get(next)) {
                (_, Some(&(tn, xn))) if tn == t => xn,
                (Some((tp, xp)), Some(&(tn, xn))) => {
                    let w = (times[t] - times[tp]) / (times[tn] - times[tp]);
                    xp + w * (xn - xp)
                }
                (Some((_, xp)), None) => xp,
                (None, Some(&(_, xn))) => xn,
                (None, None) => unreachable!(),
            };
            values[t * k + v] = x;
        }
    }
    let ind = Individual::new(ind.id(), times.to_vec(), k, values, vec![true; n_t * k])?;
    Ok((ind, empty))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(times: Vec<f64>, values: Vec<f64>, observed: Vec<bool>, k: usize) -> LongitudinalDataset {
        let ind = Individual::new("i", times, k, values, observed).unwrap();
        LongitudinalDataset::new((0..k).map(|v| format!("v{v}")).collect(), vec![ind]).unwrap()
    }

    #[test]
    fn midpoint_is_linear() {
        let d = one(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 2.0], vec![true, false, true], 1);
        let r = interpolate_missing(&d).unwrap();
        assert_eq!(r.data.individuals()[0].value(1, 0), Some(1.0));
        assert!(r.flagged.is_empty());
    }

    #[test]
    fn uses_timestamps_not_indices() {
        let d = one(vec![0.0, 1.0, 4.0], vec![0.0, 0.0, 4.0], vec![true, false, true], 1);
        let r = interpolate_missing(&d).unwrap();
        assert_eq!(r.data.individuals()[0].value(1, 0), Some(1.0));
    }

    #[test]
    fn edges_take_nearest_observation() {
        let d = one(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![0.0, 3.0, 0.0, 5.0, 0.0],
            vec![false, true, false, true, false],
            1,
        );
        let r = interpolate_missing(&d).unwrap();
        let got: Vec<f64> = (0..5).map(|t| r.data.individuals()[0].value(t, 0).unwrap()).collect();
        assert_eq!(got, vec![3.0, 3.0, 4.0, 5.0, 5.0]);
    }

    #[test]
    fn complete_data_is_unchanged() {
        let d = one(vec![0.0, 1.0], vec![1.0, 2.0, 3.0, 4.0], vec![true; 4], 2);
        let r = interpolate_missing(&d).unwrap();
        assert_eq!(r.data.individuals(), d.individuals());
    }

    #[test]
    fn empty_variable_is_zero_and_flagged() {
        let d = one(
            vec![0.0, 1.0],
            vec![1.0, 0.0, 2.0, 0.0],
            vec![true, false, true, false],
            2,
        );
        let r = interpolate_missing(&d).unwrap();
        let ind = &r.data.individuals()[0];
        assert_eq!((ind.value(0, 1), ind.value(1, 1)), (Some(0.0), Some(0.0)));
        assert_eq!(r.flagged, vec![("i".to_string(), "v1".to_string())]);
        assert_eq!(ind.observed_count(), 4);
    }
}
