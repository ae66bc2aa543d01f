//! Box-constrained Nelder–Mead.

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub converged: bool,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

/// Minimizes `f` inside `[lo, hi]` starting from `start`. Every trial point is
/// projected into the box. Converged when the simplex fits within `rel_tol`
/// of the best vertex in every coordinate.
pub(crate) fn nelder_mead<F>(
    mut f: F,
    start: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    rel_tol: f64,
    max_evaluations: usize,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut x0 = start.to_vec();
    project(&mut x0, lo, hi);
    let v0 = eval(&x0, &mut evaluations);
    simplex.push((x0.clone(), v0));
    for i in 0..dim {
        let mut x = x0.clone();
        // step away from the nearer wall so the vertex is not projected back
        x[i] = if x[i] + step[i] <= hi[i] { x[i] + step[i] } else { x[i] - step[i] };
        project(&mut x, lo, hi);
        let v = eval(&x, &mut evaluations);
        simplex.push((x, v));
    }

    let mut converged = false;
    while evaluations < max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.partial_cmp(&b.0).unwrap()));
        let best = simplex[0].0.clone();
        let spread = simplex[1..].iter().all(|(x, _)| {
            x.iter()
                .zip(&best)
                .all(|(a, b)| (a - b).abs() <= rel_tol * b.abs().max(1.0))
        });
        if spread {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            project(&mut x, lo, hi);
            x
        };

        let reflected = along(1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded, &mut evaluations);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let x = along(0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        };
        if fc < worst.1.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        for k in 1..=dim {
            let x: Vec<f64> = simplex[k]
                .0
                .iter()
                .zip(&best)
                .map(|(v, b)| b + 0.5 * (v - b))
                .collect();
            let v = eval(&x, &mut evaluations);
            simplex[k] = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.partial_cmp(&b.0).unwrap()));
    let (x, _) = simplex.swap_remove(0);
    Minimum {
        x,
        converged,
    }
}
