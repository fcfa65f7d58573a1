//! Budget-capped Nelder-Mead simplex search used as the annealer's local
//! polish step.

use crate::trajectory::{Bounds, EvalTag, Objective};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
/// Initial simplex edge as a fraction of the box width.
const INITIAL_STEP: f64 = 0.05;

struct Capped<'a, O: Objective + ?Sized> {
    obj: &'a mut O,
    bounds: &'a Bounds,
    tag: &'a EvalTag,
    left: usize,
    best: (Vec<f64>, f64),
}

impl<O: Objective + ?Sized> Capped<'_, O> {
    fn eval(&mut self, mut x: Vec<f64>) -> Option<(Vec<f64>, f64)> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        self.bounds.wrap_point(&mut x);
        let v = self.obj.evaluate(&x, self.tag);
        if v > self.best.1 {
            self.best = (x.clone(), v);
        }
        Some((x, v))
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b - a)
    a.iter().zip(b).map(|(&ai, &bi)| ai + t * (bi - ai)).collect()
}

/// Maximizes `obj` from `start` (whose value is already known) using at most
/// `max_evals` evaluations. Returns the best vertex seen.
pub fn nelder_mead<O: Objective + ?Sized>(
    obj: &mut O,
    start: &[f64],
    start_value: f64,
    bounds: &Bounds,
    max_evals: usize,
    tag: &EvalTag,
) -> (Vec<f64>, f64) {
    let mut run = Capped {
        obj,
        bounds,
        tag,
        left: max_evals,
        best: (start.to_vec(), start_value),
    };
    let _ = search(&mut run, start, start_value);
    run.best
}

fn search<O: Objective + ?Sized>(run: &mut Capped<'_, O>, start: &[f64], start_value: f64) -> Option<()> {
    let dim = start.len();
    let widths = run.bounds.widths();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.to_vec(), start_value)];
    for k in 0..dim {
        let mut x = start.to_vec();
        x[k] += INITIAL_STEP * widths[k];
        simplex.push(run.eval(x)?);
    }

    loop {
        // best first (maximization)
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();

        let reflected = run.eval(affine(&centroid, &worst.0, -REFLECT))?;
        if reflected.1 > simplex[0].1 {
            let expanded = run.eval(affine(&centroid, &worst.0, -EXPAND))?;
            simplex[dim] = if expanded.1 > reflected.1 { expanded } else { reflected };
            continue;
        }
        if reflected.1 > simplex[dim - 1].1 {
            simplex[dim] = reflected;
            continue;
        }
        let (towards, reference) = if reflected.1 > worst.1 {
            (affine(&centroid, &reflected.0, CONTRACT), reflected.1)
        } else {
            (affine(&centroid, &worst.0, CONTRACT), worst.1)
        };
        let contracted = run.eval(towards)?;
        if contracted.1 > reference {
            simplex[dim] = contracted;
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            *vertex = run.eval(affine(&anchor, &vertex.0, SHRINK))?;
        }
    }
}
