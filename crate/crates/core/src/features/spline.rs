//! Least-squares cubic spline with two pieces, used to detrend a segment
//! before the periodicity search. Mirrors the reference construction
//! operation for operation, including its degenerate outputs on very short
//! inputs.

#![allow(clippy::needless_range_loop)]

const DEG: usize = 3;
const N_SPLINE: usize = 4;
const PIECES: usize = 2;
const PIECES_EXT: usize = 8;
const N_COEF: usize = N_SPLINE * PIECES_EXT;

fn gauss_elimination(mut a: [[f64; 5]; 5], mut b: [f64; 5]) -> [f64; 5] {
    let size = 5;
    for i in 0..size {
        for j in i + 1..size {
            let factor = a[j][i] / a[i][i];
            b[j] -= factor * b[i];
            for k in i..size {
                a[j][k] -= factor * a[i][k];
            }
        }
    }
    let mut x = [0.0; 5];
    for i in (0..size).rev() {
        let mut acc = b[i];
        for j in i + 1..size {
            acc -= x[j] * a[i][j];
        }
        x[i] = acc / a[i][i];
    }
    x
}

/// Normal-equation solve of the `rows x 5` system `a x = y`.
fn lsq_solve(a: &[[f64; 5]], y: &[f64]) -> [f64; 5] {
    let mut ata = [[0.0; 5]; 5];
    let mut atb = [0.0; 5];
    for i in 0..5 {
        for j in 0..5 {
            let mut acc = 0.0;
            for row in a {
                acc += row[i] * row[j];
            }
            ata[i][j] = acc;
        }
        let mut acc = 0.0;
        for (row, &v) in a.iter().zip(y) {
            acc += row[i] * v;
        }
        atb[i] = acc;
    }
    gauss_elimination(ata, atb)
}

pub(crate) fn splinefit(y: &[f64]) -> Vec<f64> {
    let size = y.len() as i64;
    let breaks = [0i64, size / 2 - 1, size - 1];

    let h0 = [breaks[1] - breaks[0], breaks[2] - breaks[1]];
    let h_copy = [h0[0], h0[1], h0[0], h0[1]];
    let hl = [h_copy[DEG], h_copy[DEG - 1], h_copy[DEG - 2]];
    let hr = [h_copy[0], h_copy[1], h_copy[2]];
    let mut hl_cs = [0i64; DEG];
    let mut hr_cs = [0i64; DEG];
    hl_cs[0] = hl[0];
    hr_cs[0] = hr[0];
    for i in 1..DEG {
        hl_cs[i] = hl_cs[i - 1] + hl[i];
        hr_cs[i] = hr_cs[i - 1] + hr[i];
    }
    let mut breaks_ext = [0i64; 3 * DEG];
    for i in 0..DEG {
        breaks_ext[i] = breaks[0] - hl_cs[DEG - 1 - i];
        breaks_ext[i + 3] = breaks[i];
        breaks_ext[i + 6] = breaks[2] + hr_cs[i];
    }
    let mut h_ext = [0i64; 3 * DEG - 1];
    for i in 0..h_ext.len() {
        h_ext[i] = breaks_ext[i + 1] - breaks_ext[i];
    }

    let mut coefs = [[0.0f64; N_SPLINE]; N_COEF];
    for row in coefs.iter_mut().step_by(N_SPLINE) {
        row[0] = 1.0;
    }
    let mut h = [0.0f64; N_COEF];
    for (i, v) in h.iter_mut().enumerate() {
        let ii = (i % N_SPLINE + i / N_SPLINE).min(PIECES_EXT - 1);
        *v = h_ext[ii] as f64;
    }

    for k in 1..N_SPLINE {
        for j in 0..k {
            for l in 0..N_COEF {
                coefs[l][j] *= h[l] / (k - j) as f64;
            }
        }
        let mut q = [[0.0f64; PIECES_EXT]; N_SPLINE];
        for l in 0..N_COEF {
            let mut acc = 0.0;
            for m in 0..N_SPLINE {
                acc += coefs[l][m];
            }
            q[l % N_SPLINE][l / N_SPLINE] = acc;
        }
        for l in 0..PIECES_EXT {
            for m in 1..N_SPLINE {
                q[m][l] += q[m - 1][l];
            }
        }
        for l in 0..N_COEF {
            coefs[l][k] = if l % N_SPLINE == 0 {
                0.0
            } else {
                q[l % N_SPLINE - 1][l / N_SPLINE]
            };
        }
        for j in 0..=k {
            for l in 0..N_COEF {
                coefs[l][j] /= q[N_SPLINE - 1][l / N_SPLINE];
            }
        }
        for i in 0..N_COEF - DEG {
            for j in 0..=k {
                coefs[i][j] -= coefs[DEG + i][j];
            }
        }
        for row in coefs.iter_mut().step_by(N_SPLINE) {
            row[k] = 0.0;
        }
    }

    let mut scale = [1.0f64; N_COEF];
    for k in 0..N_SPLINE - 1 {
        for i in 0..N_COEF {
            scale[i] /= h[i];
        }
        for i in 0..N_COEF {
            coefs[i][N_SPLINE - 1 - (k + 1)] *= scale[i];
        }
    }

    let mut jj = [[0usize; PIECES]; N_SPLINE];
    for j in 0..PIECES {
        jj[0][j] = N_SPLINE * (1 + j);
        for i in 1..N_SPLINE {
            jj[i][j] = jj[i - 1][j] + DEG;
        }
    }
    let mut coefs_out = [[0.0f64; N_SPLINE]; N_SPLINE * PIECES];
    for (i, row) in coefs_out.iter_mut().enumerate() {
        *row = coefs[jj[i % N_SPLINE][i / N_SPLINE] - 1];
    }

    // basis values at every sample, one row of the design matrix per sample
    let n = y.len();
    let mut a = vec![[0.0f64; 5]; n];
    let mut break_ind = 1usize;
    let mut second = 0usize;
    for (i, row) in a.iter_mut().enumerate() {
        let ii = i as i64;
        if ii >= breaks[break_ind] && break_ind < 2 {
            break_ind += 1;
        }
        let xs = (ii - breaks[break_ind - 1]) as f64;
        if ii >= breaks[1] {
            second = 1;
        }
        for j in 0..N_SPLINE {
            let c = &coefs_out[j + (break_ind - 1) * N_SPLINE];
            let mut v = c[0];
            for coef in c.iter().skip(1) {
                v = v * xs + coef;
            }
            row[j + second] = v;
        }
    }

    let x = lsq_solve(&a, y);

    let mut c = [[0.0f64; N_SPLINE * PIECES]; PIECES + N_SPLINE - 1];
    for i in 0..N_SPLINE * N_SPLINE * PIECES {
        let c_row = i % N_SPLINE + (i / N_SPLINE) % 2;
        let c_col = i / N_SPLINE;
        c[c_row][c_col] = coefs_out[i % (N_SPLINE * 2)][i / (N_SPLINE * 2)];
    }
    let mut spline = [[0.0f64; N_SPLINE]; PIECES];
    for j in 0..N_SPLINE * PIECES {
        for (i, xi) in x.iter().enumerate() {
            spline[j % PIECES][j / PIECES] += c[i][j] * xi;
        }
    }

    (0..n)
        .map(|j| {
            let ji = j as i64;
            let half = usize::from(ji >= breaks[1]);
            let offset = (ji - breaks[1] * half as i64) as f64;
            let s = &spline[half];
            let mut v = s[0];
            for coef in s.iter().skip(1) {
                v = v * offset + coef;
            }
            v
        })
        .collect()
}
