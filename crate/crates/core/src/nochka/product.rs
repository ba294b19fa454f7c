use super::weights::{to_f64, NochkaWeights};
use super::NochkaError;
use crate::projgeom::{combinations, HyperplaneSystem};

/// Picks `rk(R)` planes from `R` spanning the same space as `R`, such that
/// `∏_{j∈R} E_j^{ω(j)} <= ∏_l E_{j_l}`.
///
/// Every rank-preserving subset is examined and the one with the largest
/// right-hand product wins. Comparisons are done in logarithms.
pub fn select_product_indices(
    w: &NochkaWeights,
    sys: &HyperplaneSystem,
    e: &[f64],
    r: &[usize],
) -> Result<Vec<usize>, NochkaError> {
    let q = sys.q();
    let valid = r.len() <= sys.big_n() + 1
        && r.iter().all(|&j| j < q)
        && e.len() == q
        && w.weights.len() == q
        && r.iter().all(|&j| e[j] >= 1.0);
    let mut sorted = r.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if !valid || sorted.len() != r.len() {
        return Err(NochkaError::BadIndexSet(r.to_vec()));
    }
    let rk = sys.rank_of_subset(&sorted);
    let lhs: f64 = sorted.iter().map(|&j| to_f64(&w.weights[j]) * e[j].ln()).sum();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for pick in combinations(sorted.len(), rk) {
        let idx: Vec<usize> = pick.iter().map(|&p| sorted[p]).collect();
        if sys.rank_of_subset(&idx) != rk {
            continue;
        }
        let rhs: f64 = idx.iter().map(|&j| e[j].ln()).sum();
        if best.as_ref().map_or(true, |(b, _)| rhs > *b) {
            best = Some((rhs, idx));
        }
    }
    match best {
        Some((rhs, idx)) if lhs <= rhs + 1e-12 * (1.0 + rhs.abs()) => Ok(idx),
        _ => Err(NochkaError::NoSelection(sorted)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nochka::compute_weights;
    use crate::projgeom::{subsets_up_to, Hyperplane};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system(rows: &[&[f64]], big_n: usize) -> HyperplaneSystem {
        let planes = rows
            .iter()
            .enumerate()
            .map(|(i, r)| Hyperplane::real(r, format!("H{i}")).unwrap())
            .collect();
        HyperplaneSystem::new(planes, big_n).unwrap()
    }

    #[test]
    fn unit_values_accept_any_spanning_choice() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[1.0, 2.0], &[2.0, -3.0]], 2);
        let w = compute_weights(&sys).unwrap();
        let pick = select_product_indices(&w, &sys, &[1.0; 5], &[0, 2, 4]).unwrap();
        assert_eq!(pick.len(), 2);
        assert_eq!(sys.rank_of_subset(&pick), 2);
    }

    #[test]
    fn general_position_selects_r_itself() {
        let sys = system(
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 1.0, 1.0]],
            2,
        );
        let w = compute_weights(&sys).unwrap();
        let pick = select_product_indices(&w, &sys, &[2.0, 3.0, 5.0, 7.0], &[0, 1, 3]).unwrap();
        assert_eq!(pick, vec![0, 1, 3]);
    }

    #[test]
    fn random_values_on_five_points_pass_brute_force() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[1.0, 2.0], &[2.0, -3.0]], 2);
        let w = compute_weights(&sys).unwrap();
        let wf = w.weights_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let e: Vec<f64> = (0..5).map(|_| rng.gen_range(1.0..50.0)).collect();
            for r in subsets_up_to(5, 3) {
                let pick = select_product_indices(&w, &sys, &e, &r).unwrap();
                // brute force: the best rank-preserving product over all choices
                let rk = sys.rank_of_subset(&r);
                let brute = combinations(r.len(), rk)
                    .map(|p| p.iter().map(|&i| r[i]).collect::<Vec<_>>())
                    .filter(|s| sys.rank_of_subset(s) == rk)
                    .map(|s| s.iter().map(|&j| e[j]).product::<f64>())
                    .fold(0.0, f64::max);
                let chosen: f64 = pick.iter().map(|&j| e[j]).product();
                let lhs: f64 = r.iter().map(|&j| e[j].powf(wf[j])).product();
                assert!((chosen - brute).abs() <= 1e-9 * brute);
                assert!(lhs <= chosen * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rejects_values_below_one() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]], 1);
        let w = compute_weights(&sys).unwrap();
        assert!(select_product_indices(&w, &sys, &[0.5, 1.0, 1.0], &[0, 1]).is_err());
    }
}
