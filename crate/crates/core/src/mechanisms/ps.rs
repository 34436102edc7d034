use num_traits::{One, Zero};

use crate::assignment::ProbabilisticAssignment;
use crate::instance::Instance;
use crate::rational::Rat;

/// Probabilistic serial: every agent eats her best remaining acceptable
/// object at unit speed from time 0 to time 1. Event times are exact.
pub fn probabilistic_serial(inst: &Instance) -> ProbabilisticAssignment {
    let n = inst.n_agents();
    let m = inst.n_objects();
    let mut x = ProbabilisticAssignment::zeros(n, m);
    let mut supply: Vec<Rat> = (0..m)
        .map(|j| Rat::from_integer(inst.capacity(j).into()))
        .collect();
    let mut t = Rat::zero();
    let one = Rat::one();
    // cursor into each agent's list; entries before it are exhausted
    let mut cursor = vec![0usize; n];

    while t < one {
        let mut eating: Vec<Option<usize>> = vec![None; n];
        let mut eaters = vec![0u64; m];
        for i in 0..n {
            let list = inst.prefs(i);
            while cursor[i] < list.len() && supply[list[cursor[i]]].is_zero() {
                cursor[i] += 1;
            }
            if let Some(&j) = list.get(cursor[i]) {
                eating[i] = Some(j);
                eaters[j] += 1;
            }
        }
        if eaters.iter().all(|&e| e == 0) {
            break;
        }
        let mut dt = &one - &t;
        for j in 0..m {
            if eaters[j] > 0 {
                let until = &supply[j] / Rat::from_integer(eaters[j].into());
                if until < dt {
                    dt = until;
                }
            }
        }
        for (i, e) in eating.iter().enumerate() {
            if let Some(j) = *e {
                x.add(i, j, &dt);
            }
        }
        for j in 0..m {
            if eaters[j] > 0 {
                supply[j] -= &dt * Rat::from_integer(eaters[j].into());
            }
        }
        t += dt;
    }
    x
}

/// Whether no agent prefers another agent's row under first-order
/// stochastic dominance with respect to her own preferences.
pub fn is_envy_free(inst: &Instance, x: &ProbabilisticAssignment) -> bool {
    let n = inst.n_agents();
    for i in 0..n {
        let list = inst.prefs(i);
        for other in 0..n {
            if other == i {
                continue;
            }
            let mut own = Rat::zero();
            let mut theirs = Rat::zero();
            for &j in list {
                own += x.get(i, j);
                theirs += x.get(other, j);
                if own < theirs {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn ps_on_three_object_instance() {
        let inst =
            Instance::from_lists(&[2, 1, 1], &[vec![0, 1, 2], vec![0, 1, 2], vec![0], vec![0]]).unwrap();
        let x = probabilistic_serial(&inst);
        let h = rat(1, 2);
        let z = rat(0, 1);
        let expected = ProbabilisticAssignment::from_rows(vec![
            vec![h.clone(), h.clone(), z.clone()],
            vec![h.clone(), h.clone(), z.clone()],
            vec![h.clone(), z.clone(), z.clone()],
            vec![h, z.clone(), z],
        ])
        .unwrap();
        assert_eq!(x, expected);
        assert!(is_envy_free(&inst, &x));
    }

    #[test]
    fn ps_trivial_cases() {
        let inst = Instance::from_lists(&[1], &[vec![0]]).unwrap();
        assert_eq!(*probabilistic_serial(&inst).get(0, 0), rat(1, 1));
        let inst = Instance::from_lists(&[1], &[vec![], vec![0]]).unwrap();
        let x = probabilistic_serial(&inst);
        assert_eq!(x.row_sum(0), rat(0, 1));
        assert_eq!(x.row_sum(1), rat(1, 1));
    }

    #[test]
    fn envy_detection() {
        let inst = Instance::from_lists(&[1, 1], &[vec![0, 1], vec![0, 1]]).unwrap();
        let x = ProbabilisticAssignment::from_rows(vec![
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 1), rat(0, 1)],
        ])
        .unwrap();
        assert!(!is_envy_free(&inst, &x));
        let same = ProbabilisticAssignment::from_rows(vec![
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 2), rat(1, 2)],
        ])
        .unwrap();
        assert!(is_envy_free(&inst, &same));
    }
}
