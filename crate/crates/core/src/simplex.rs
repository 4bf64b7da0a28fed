//! Minimal Nelder–Mead simplex minimiser used by the control inversion.

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    /// Stop once every vertex lies within this distance of the best one.
    pub x_tolerance: f64,
    /// ...and the objective spread across the simplex is below this.
    pub f_tolerance: f64,
    pub max_evaluations: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp<const N: usize>(a: &[f64; N], b: &[f64; N], t: f64) -> [f64; N] {
    std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
}

fn dist<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Minimise `f` from `start` with an axis-aligned initial simplex of size `step`.
///
/// Non-finite objective values are treated as +∞.
pub(crate) fn minimize<const N: usize, F>(
    mut f: F,
    start: [f64; N],
    step: f64,
    opts: &SimplexOptions,
) -> SimplexResult<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut evals = 0usize;
    let mut eval = |x: &[f64; N], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut verts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    let v0 = eval(&start, &mut evals);
    verts.push((start, v0));
    for i in 0..N {
        let mut x = start;
        x[i] += step;
        let v = eval(&x, &mut evals);
        verts.push((x, v));
    }

    let mut converged = false;
    while evals < opts.max_evaluations {
        // Stable sort keeps the ordering deterministic on ties.
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = verts[0].0;
        let spread = verts[N].1 - verts[0].1;
        let diameter = verts[1..].iter().map(|(x, _)| dist(x, &best)).fold(0.0, f64::max);
        if diameter < opts.x_tolerance && spread <= opts.f_tolerance {
            converged = true;
            break;
        }

        let centroid: [f64; N] = std::array::from_fn(|i| verts[..N].iter().map(|(x, _)| x[i]).sum::<f64>() / N as f64);
        let worst = verts[N];
        let reflected = lerp(&centroid, &worst.0, -REFLECT);
        let fr = eval(&reflected, &mut evals);

        if fr < verts[0].1 {
            let expanded = lerp(&centroid, &worst.0, -EXPAND);
            let fe = eval(&expanded, &mut evals);
            verts[N] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < verts[N - 1].1 {
            verts[N] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < worst.1 {
                let c = lerp(&centroid, &reflected, CONTRACT);
                let v = eval(&c, &mut evals);
                (c, v)
            } else {
                let c = lerp(&centroid, &worst.0, CONTRACT);
                let v = eval(&c, &mut evals);
                (c, v)
            };
            if fc < worst.1.min(fr) {
                verts[N] = (contracted, fc);
            } else {
                let anchor = verts[0].0;
                for vert in verts.iter_mut().skip(1) {
                    let x = lerp(&anchor, &vert.0, SHRINK);
                    *vert = (x, eval(&x, &mut evals));
                }
            }
        }
    }

    verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexResult {
        x: verts[0].0,
        value: verts[0].1,
        evaluations: evals,
        converged,
    }
}
