use faultbands::fem::CscUpper;
use faultbands::kkt::{BRow, KktSolver, RowState};

fn main() {
    // random-ish SPD K: 3D grid graph Laplacian + diagonal shift
    let n: usize = 60;
    let mut trips = Vec::new();
    let mut seed = 12345u64;
    let mut rnd = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((seed >> 33) as f64) / (u32::MAX as f64)
    };
    for i in 0..n {
        trips.push((i, i, 10.0 + 5.0 * rnd()));
        if i + 1 < n { trips.push((i, i + 1, -1.0 - rnd())); }
        if i + 7 < n { trips.push((i, i + 7, -0.5 * rnd())); }
    }
    let k = CscUpper::from_triplets(n, trips.clone());
    // rows: 8 elements x 3 rows, random dof sets
    let mut rows = Vec::new();
    for e in 0..8usize {
        for c in 0..3usize {
            let mut cols = Vec::new();
            for j in 0..4 {
                let d = (e * 5 + j * 3 + c) % n;
                cols.push((d, 0.2 + 0.1 * rnd()));
            }
            cols.sort_by_key(|&(d, _)| d);
            cols.dedup_by_key(|p| p.0);
            let cone_partner = if c > 0 { Some(3 * e) } else { None };
            rows.push(BRow { cols, area: 1.0 + rnd(), cone_partner });
        }
    }
    // dense assembly of the same equations
    let m = rows.len();
    let nn = n + m;
    let mut a = vec![vec![0.0f64; nn]; nn];
    for &(i, j, v) in &trips {
        a[i][j] += v;
        if i != j { a[j][i] += v; }
    }
    let mut states = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let st = match r % 3 {
            0 => RowState::Jump { target: 0.01 * rnd() },
            1 => RowState::Pinned { value: rnd() },
            _ => RowState::Cone { k: 0.3 * rnd(), q: 0.2 * rnd() },
        };
        states.push(st);
        match st {
            RowState::Jump { .. } => {
                for &(d, cc) in &row.cols {
                    a[n + r][d] = cc;
                    a[d][n + r] = -cc * row.area;
                }
            }
            RowState::Pinned { .. } => {
                a[n + r][n + r] = 1.0;
            }
            RowState::Cone { k: kc, .. } => {
                for &(d, cc) in &row.cols {
                    a[d][n + r] = -cc * row.area;
                }
                a[n + r][n + r] = 1.0;
                let p = row.cone_partner.unwrap();
                a[n + r][n + p] = -kc;
            }
        }
    }
    let mut b = vec![0.0f64; nn];
    for i in 0..n { b[i] = rnd() - 0.5; }
    for (r, st) in states.iter().enumerate() {
        match *st {
            RowState::Jump { target } => b[n + r] = target,
            RowState::Pinned { value } => {
                b[n + r] = value;
                // pinned force contributions move into u rows in dense form:
                // keep the columns here instead (dense solves the full system)
                for &(d, cc) in &rows[r].cols {
                    a[d][n + r] = -cc * rows[r].area;
                }
            }
            RowState::Cone { q, .. } => b[n + r] = q,
        }
    }
    // dense LU solve
    let mut aa = a.clone();
    let mut bb = b.clone();
    for p in 0..nn {
        // partial pivot
        let mut imax = p;
        for i in p + 1..nn { if aa[i][p].abs() > aa[imax][p].abs() { imax = i; } }
        aa.swap(p, imax);
        bb.swap(p, imax);
        let piv = aa[p][p];
        for i in p + 1..nn {
            let f = aa[i][p] / piv;
            if f == 0.0 { continue; }
            for j in p..nn { aa[i][j] -= f * aa[p][j]; }
            bb[i] -= f * bb[p];
        }
    }
    let mut x = vec![0.0f64; nn];
    for p in (0..nn).rev() {
        let mut s = bb[p];
        for j in p + 1..nn { s -= aa[p][j] * x[j]; }
        x[p] = s / aa[p][p];
    }

    // sparse solve: multiplier unknowns are lambda = x[n+r] (note dense x is
    // the raw multiplier, sparse dlam is physical = raw)
    let mut solver = KktSolver::new(&k, rows.clone()).unwrap();
    let sol = solver.solve(&states, &b[..n]).unwrap();
    let mut max_du = 0.0f64;
    for i in 0..n { max_du = max_du.max((sol.du[i] - x[i]).abs()); }
    let mut max_dl = 0.0f64;
    for r in 0..m { max_dl = max_dl.max((sol.dlam[r] - x[n + r]).abs()); }
    println!("max |du - dense| = {max_du:.3e}, max |dlam - dense| = {max_dl:.3e}, resid {:.2e}", sol.residual_rel);
}
