use acdc_opf::model::load_case;
use acdc_opf::partition::decompose;
use acdc_opf::{solve_aladin, AladinSettings};

#[test]
fn probe() {
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let mut s = AladinSettings::default();
    s.max_iter = 40;
    s.qp_oracle = false;
    let run = solve_aladin(&dec, &s, None, None);
    eprintln!("failure = {:?}", run.run.failure);
    eprintln!("converged = {}, iters = {}", run.run.converged, run.run.iterations);
    for (t, it) in run.run.history.iter().enumerate() {
        eprintln!(
            "t={:3}  cons={:10.3e}  dual={:10.3e}  obj={:14.8}",
            t, it.consensus_inf, it.dual_inf, it.objective
        );
    }
    eprintln!("min_eig_min = {:?}", run.min_eig_min);
    eprintln!("qp_kkt_resid_max = {:?}", run.qp_kkt_residual_max);
}

#[test]
fn probe_active() {
    use acdc_opf::aladin::active_row_count;
    use acdc_opf::aladin::sensitivity::build_jacobian;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let mut s = AladinSettings::default();
    s.max_iter = 6;
    s.qp_oracle = false;
    let run = solve_aladin(&dec, &s, None, None);
    for (l, r) in dec.regions.iter().enumerate() {
        eprintln!(
            "region {}: n={} eq={} fixed={} ineq={}",
            l,
            r.nlp.n,
            r.nlp.eq.len(),
            r.nlp.fixed_vars().len(),
            r.nlp.ineq.len()
        );
    }
    eprintln!("active rows per iteration (region-by-region):");
    for (t, counts) in run.active_counts.iter().enumerate() {
        eprintln!("  t={:2}  {:?}", t, counts);
    }
    // Rank of J at the last recorded local points.
    let tau = 1e-6;
    if let Some(xs) = run.xs_history.last() {
        for (l, r) in dec.regions.iter().enumerate() {
            let j = build_jacobian(&r.nlp, &xs[l], tau);
            let svd = j.clone().svd(false, false);
            let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
            let rank = svd
                .singular_values
                .iter()
                .filter(|&&v| v > smax * 1e-10)
                .count();
            eprintln!(
                "region {}: J is {}x{}, rank {}, active_row_count={}, sigma_min={:.3e}",
                l,
                j.nrows(),
                j.ncols(),
                rank,
                active_row_count(&r.nlp, &xs[l], tau),
                svd.singular_values.iter().cloned().fold(f64::MAX, f64::min)
            );
        }
    }
}

#[test]
fn probe_spectrum() {
    use acdc_opf::aladin::sensitivity::extract_exact;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let mut s = AladinSettings::default();
    s.max_iter = 2;
    s.qp_oracle = false;
    let run = solve_aladin(&dec, &s, None, None);
    let xs = run.xs_history.last().unwrap();
    // Re-solve each local problem the way the loop does (prox around z, price
    // lambda) is not needed: extract_exact only needs a Solution. Use the
    // locals field captured by the run.
    for (l, (r, sol)) in dec.regions.iter().zip(run.locals.iter()).enumerate() {
        let sens = extract_exact(&r.nlp, sol, 1e-6);
        // Recompute raw (pre-flip) spectrum via the Lagrangian Hessian for eyes.
        let h = &sens.h;
        let eig = h.clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eprintln!(
            "region {}: flipped spectrum min={:.3e} p25={:.3e} median={:.3e} max={:.3e}  (raw min_eig={:.3e})  x match={}",
            l, ev[0], ev[ev.len()/4], ev[ev.len()/2], ev[ev.len()-1], sens.min_eig,
            sol.x.iter().zip(xs[l].iter()).all(|(a,b)| (a-b).abs() < 1e-12)
        );
    }
}

#[test]
fn probe_rows() {
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let mut s = AladinSettings::default();
    s.max_iter = 10;
    s.qp_oracle = false;
    let run = solve_aladin(&dec, &s, None, None);
    let xs = run.xs_history.last().unwrap();
    let zs = &run.zs;
    let r = dec.consensus_residual(xs);
    let rz = dec.consensus_residual(zs);
    eprintln!("consensus rows (x locals | z targets):");
    for (row, (vx, vz)) in r.iter().zip(rz.iter()).enumerate() {
        eprintln!("  row {:2}: x {:10.3e}   z {:10.3e}", row, vx, vz);
    }
    // For each row, list the touching (region, var) entries with values and
    // bound distances.
    let worst = r
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .unwrap()
        .0;
    eprintln!("worst row {worst}:");
    for (l, reg) in dec.regions.iter().enumerate() {
        for &(row, col, v) in &reg.a.trips {
            if row == worst {
                let x = xs[l][col];
                let lb = reg.nlp.lb[col];
                let ub = reg.nlp.ub[col];
                eprintln!(
                    "  region {} ({}) var {:3} coeff {:+.1}  x={:.8}  z={:.8}  lb={:.4} ub={:.4}  d_lb={:.2e} d_ub={:.2e}",
                    l, reg.name, col, v, x, zs[l][col], lb, ub, x - lb, ub - x
                );
            }
        }
    }
    // Are those coordinates pinned by active rows in J? Rebuild J and look
    // at the columns for the worst row's variables.
    use acdc_opf::aladin::sensitivity::build_jacobian;
    for (l, reg) in dec.regions.iter().enumerate() {
        let cols: Vec<usize> = reg
            .a
            .trips
            .iter()
            .filter(|t| t.0 == worst)
            .map(|t| t.1)
            .collect();
        if cols.is_empty() {
            continue;
        }
        let j = build_jacobian(&reg.nlp, &xs[l], 1e-6);
        for c in cols {
            let colnorm: f64 = (0..j.nrows()).map(|r| j[(r, c)].abs()).sum();
            eprintln!(
                "  region {} var {:3}: J column abs-sum {:.3e} over {} rows",
                l,
                c,
                colnorm,
                j.nrows()
            );
        }
    }
}

#[test]
fn probe_equivalence() {
    use acdc_opf::central::solve_centralized;
    use acdc_opf::nlp::IpmSettings;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let central = solve_centralized(&net, &IpmSettings::default());
    let xc = &central.solution.x;
    // Map the centralized optimum into every region's local coordinates.
    let xs: Vec<Vec<f64>> = dec
        .regions
        .iter()
        .map(|r| r.to_central.iter().map(|&c| xc[c]).collect())
        .collect();
    let cons = dec.consensus_residual(&xs);
    let cmax = cons.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
    eprintln!("consensus at mapped central optimum: {:.3e}", cmax);
    for (l, (r, x)) in dec.regions.iter().zip(&xs).enumerate() {
        let eqv = r.nlp.eq_values(x);
        let emax = eqv.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        let (erow, _) = eqv
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        let inv = r.nlp.ineq_values(x);
        let imax = inv.iter().cloned().fold(0.0f64, f64::max);
        let mut bmax = 0.0f64;
        for i in 0..r.nlp.n {
            bmax = bmax.max(r.nlp.lb[i] - x[i]).max(x[i] - r.nlp.ub[i]);
        }
        eprintln!(
            "region {} ({}): worst |eq|={:.3e} at row {}, worst ineq={:.3e}, worst bound={:.3e}",
            l, r.name, emax, erow, imax, bmax
        );
        // objective decomposition check
    }
    let local_obj: f64 = dec
        .regions
        .iter()
        .zip(&xs)
        .map(|(r, x)| r.nlp.objective_value(x))
        .sum();
    eprintln!(
        "objective: central {:.8}  sum-of-locals {:.8}  diff {:.3e}",
        central.solution.objective,
        local_obj,
        (central.solution.objective - local_obj).abs()
    );
}

#[test]
fn probe_reachability() {
    use acdc_opf::aladin::sensitivity::build_jacobian;
    use nalgebra::{DMatrix, DVector};
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let mut s = AladinSettings::default();
    s.max_iter = 10;
    s.qp_oracle = false;
    let run = solve_aladin(&dec, &s, None, None);
    let xs = run.xs_history.last().unwrap();
    let r = DVector::from(dec.consensus_residual(xs));
    let q = dec.q;
    // Columns of the reachable map: for each region, A_l * P_l where P_l
    // projects onto null(J_l).
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    for (l, reg) in dec.regions.iter().enumerate() {
        let n = reg.nlp.n;
        let j = build_jacobian(&reg.nlp, &xs[l], 1e-6);
        let jjt = &j * j.transpose();
        let inv: DMatrix<f64> = jjt
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .unwrap_or_else(|| jjt.try_inverse().unwrap());
        let p: DMatrix<f64> = DMatrix::identity(n, n) - j.transpose() * inv * &j;
        let mut a: DMatrix<f64> = DMatrix::zeros(q, n);
        for &(row, col, v) in &reg.a.trips {
            a[(row, col)] += v;
        }
        blocks.push(&a * p);
        let _ = l;
    }
    let ncols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut m: DMatrix<f64> = DMatrix::zeros(q, ncols);
    let mut off = 0;
    for b in &blocks {
        m.view_mut((0, off), (q, b.ncols())).copy_from(b);
        off += b.ncols();
    }
    let svd = m.clone().svd(true, true);
    let w = svd.solve(&(-&r), 1e-10).unwrap();
    let best = &r + &m * w;
    eprintln!("residual ||r||_inf = {:.3e}", r.amax());
    eprintln!("after best feasible correction: {:.3e}", best.amax());
    for (row, v) in best.iter().enumerate() {
        if v.abs() > 1e-6 {
            eprintln!("  unreachable row {:2}: {:10.3e}", row, v);
        }
    }
    // Which active rows in each region pin the boundary coordinates? List
    // active bound rows and active inequality indices.
    for (l, reg) in dec.regions.iter().enumerate() {
        let x = &xs[l];
        let tau = 1e-6;
        let mut acts: Vec<String> = Vec::new();
        for (i, h) in reg.nlp.ineq_values(x).iter().enumerate() {
            if *h >= -tau {
                acts.push(format!("ineq{}={:.1e}", i, h));
            }
        }
        for i in 0..reg.nlp.n {
            if reg.nlp.lb[i] == reg.nlp.ub[i] {
                continue;
            }
            if reg.nlp.ub[i].is_finite() && x[i] >= reg.nlp.ub[i] - tau {
                acts.push(format!("ub{}", i));
            }
            if reg.nlp.lb[i].is_finite() && x[i] <= reg.nlp.lb[i] + tau {
                acts.push(format!("lb{}", i));
            }
        }
        eprintln!("region {} ({}) actives: {}", l, reg.name, acts.join(" "));
    }
}

#[test]
fn probe_fixed_point_at_central() {
    use acdc_opf::central::solve_centralized;
    use acdc_opf::nlp::IpmSettings;
    use acdc_opf::AladinInit;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let central = solve_centralized(&net, &IpmSettings::default());
    let xc = &central.solution.x;
    let xs: Vec<Vec<f64>> = dec
        .regions
        .iter()
        .map(|r| r.to_central.iter().map(|&c| xc[c]).collect())
        .collect();

    // Step 1: price discovery at the optimum. Pin the locals hard onto the
    // mapped optimum and couple almost rigidly; the QP's multiplier is then
    // the consensus price supporting x*.
    let mut s1 = AladinSettings::default();
    s1.max_iter = 1;
    s1.eps = 0.0;
    s1.rho = 1e6;
    s1.mu = 1e9;
    let init1 = AladinInit {
        zs: xs.clone(),
        lambda: vec![0.0; dec.q],
    };
    let run1 = solve_aladin(&dec, &s1, None, Some(init1));
    assert!(run1.run.failure.is_none(), "{:?}", run1.run.failure);
    eprintln!("lambda* estimate: {:?}", &run1.lambda[..8.min(dec.q)]);
    let drift1 = run1
        .run
        .xs
        .iter()
        .zip(&xs)
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()))
        .fold(0.0f64, f64::max);
    eprintln!("local drift from x* under rho=1e6, lambda=0: {:.3e}", drift1);

    // Step 2: one standard iteration from (z = x*, lambda = lambda*).
    let mut s2 = AladinSettings::default();
    s2.max_iter = 1;
    s2.eps = 0.0;
    let init2 = AladinInit {
        zs: xs.clone(),
        lambda: run1.lambda.clone(),
    };
    let run2 = solve_aladin(&dec, &s2, None, Some(init2));
    assert!(run2.run.failure.is_none(), "{:?}", run2.run.failure);
    let xdrift = run2
        .run
        .xs
        .iter()
        .zip(&xs)
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()))
        .fold(0.0f64, f64::max);
    let zdrift = run2
        .zs
        .iter()
        .zip(&xs)
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()))
        .fold(0.0f64, f64::max);
    let ldrift = run2
        .lambda
        .iter()
        .zip(&run1.lambda)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    eprintln!("one standard iteration from the optimum:");
    eprintln!("  local x drift  {:.3e}", xdrift);
    eprintln!("  QP target (z) drift {:.3e}", zdrift);
    eprintln!("  price drift    {:.3e}", ldrift);
    let cons1 = run2.run.history[0].consensus_inf;
    eprintln!("  consensus at locals {:.3e}", cons1);
}

#[test]
fn probe_qp_tradeoff() {
    use acdc_opf::aladin::sensitivity::{build_jacobian, extract_exact};
    use acdc_opf::aladin::{solve_coupled_qp, QpRegion};
    use nalgebra::{DMatrix, DVector};
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let q = dec.q;
    let mut s = AladinSettings::default();
    s.max_iter = 10;
    s.qp_oracle = false;
    let run = solve_aladin(&dec, &s, None, None);
    let xs = run.xs_history.last().unwrap();
    let locals = &run.locals;
    let lambda = DVector::from(run.lambda.clone());
    let tau = 1e-6;

    let regions: Vec<QpRegion> = dec
        .regions
        .iter()
        .zip(locals)
        .map(|(r, sol)| {
            let sens = extract_exact(&r.nlp, sol, tau);
            let mut a_t: DMatrix<f64> = DMatrix::zeros(r.nlp.n, q);
            for &(row, col, v) in &r.a.trips {
                a_t[(col, row)] += v;
            }
            QpRegion {
                h: sens.h,
                j: sens.j,
                g: sens.g,
                a_t,
                ax: DVector::from(r.a.mul(&sol.x)),
            }
        })
        .collect();

    // The QP's own answer at the current price.
    let sol = solve_coupled_qp(&regions, &lambda, s.mu).unwrap();
    eprintln!("QP: |s| = {:.3e}, |lambda_qp| = {:.3e}", sol.s.amax(), sol.lambda_qp.amax());

    // Feasible least-norm closing direction (from null-space projectors).
    let mut blocks: Vec<DMatrix<f64>> = Vec::new();
    let mut r_total = DVector::zeros(q);
    for reg in &regions {
        r_total += &reg.ax;
    }
    for (l, reg) in dec.regions.iter().enumerate() {
        let n = reg.nlp.n;
        let j = build_jacobian(&reg.nlp, &xs[l], tau);
        let jjt = &j * j.transpose();
        let inv: DMatrix<f64> = jjt
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .unwrap_or_else(|| jjt.try_inverse().unwrap());
        let p: DMatrix<f64> = DMatrix::identity(n, n) - j.transpose() * inv * &j;
        blocks.push(regions[l].a_t.transpose() * p);
    }
    let ncols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut m: DMatrix<f64> = DMatrix::zeros(q, ncols);
    let mut off = 0;
    for b in &blocks {
        m.view_mut((0, off), (q, b.ncols())).copy_from(b);
        off += b.ncols();
    }
    let svd = m.clone().svd(true, true);
    let w = svd.solve(&(-&r_total), 1e-10).unwrap();
    // The per-region closing displacement (projected).
    let mut dxs: Vec<DVector<f64>> = Vec::new();
    let mut off = 0;
    for (l, reg) in dec.regions.iter().enumerate() {
        let n = reg.nlp.n;
        let wl = DVector::from(w.rows(off, n).clone_owned());
        let j = build_jacobian(&reg.nlp, &xs[l], tau);
        let jjt = &j * j.transpose();
        let inv: DMatrix<f64> = jjt
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .unwrap_or_else(|| jjt.try_inverse().unwrap());
        let p: DMatrix<f64> = DMatrix::identity(n, n) - j.transpose() * inv * &j;
        dxs.push(p * wl);
        off += n;
    }
    // Model cost of the closing step vs the QP's own step.
    let mut quad_close = 0.0;
    let mut lin_close = 0.0;
    let mut norm_close = 0.0f64;
    for (l, reg) in regions.iter().enumerate() {
        quad_close += 0.5 * (dxs[l].transpose() * &reg.h * &dxs[l])[(0, 0)];
        lin_close += reg.g.dot(&dxs[l]);
        norm_close = norm_close.max(dxs[l].amax());
    }
    let mut quad_qp = 0.0;
    let mut lin_qp = 0.0;
    for (l, reg) in regions.iter().enumerate() {
        quad_qp += 0.5 * (sol.dx[l].transpose() * &reg.h * &sol.dx[l])[(0, 0)];
        lin_qp += reg.g.dot(&sol.dx[l]);
    }
    eprintln!("closing step: |dx|={:.3e}  quad={:.6e}  lin={:.6e}", norm_close, quad_close, lin_close);
    eprintln!("qp step:      |dx|={:.3e}  quad={:.6e}  lin={:.6e}", sol.dx.iter().map(|d| d.amax()).fold(0.0f64, f64::max), quad_qp, lin_qp);
    // s-penalty comparison: closing gives s=0; QP step pays lambda's + mu/2 s^2.
    let pen_qp = lambda.dot(&sol.s) + 0.5 * s.mu * sol.s.norm_squared();
    eprintln!("qp s-penalty = {:.6e}  (mu={:.1e})", pen_qp, s.mu);
    eprintln!("closing total model cost = {:.6e}", quad_close + lin_close);
    eprintln!("qp total model cost      = {:.6e}", quad_qp + lin_qp + pen_qp);
}

#[test]
fn probe_warm_and_long() {
    use acdc_opf::central::solve_centralized;
    use acdc_opf::nlp::IpmSettings;
    use acdc_opf::AladinInit;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let central = solve_centralized(&net, &IpmSettings::default());
    let xc = &central.solution.x;
    let xs: Vec<Vec<f64>> = dec
        .regions
        .iter()
        .map(|r| r.to_central.iter().map(|&c| xc[c]).collect())
        .collect();
    // lambda* via the rigid-coupling probe
    let mut s1 = AladinSettings::default();
    s1.max_iter = 1;
    s1.eps = 0.0;
    s1.rho = 1e6;
    s1.mu = 1e9;
    let run1 = solve_aladin(
        &dec,
        &s1,
        None,
        Some(AladinInit { zs: xs.clone(), lambda: vec![0.0; dec.q] }),
    );
    // Warm start: flat primal, true price.
    let mut sw = AladinSettings::default();
    sw.max_iter = 40;
    let init = AladinInit {
        zs: dec.regions.iter().map(|r| r.nlp.x0.clone()).collect(),
        lambda: run1.lambda.clone(),
    };
    let warm = solve_aladin(&dec, &sw, None, Some(init));
    eprintln!(
        "warm lambda: converged={} iters={} failure={:?}",
        warm.run.converged, warm.run.iterations, warm.run.failure
    );
    for (t, it) in warm.run.history.iter().enumerate() {
        eprintln!(
            "  t={:2} cons={:9.3e} dual={:9.3e}",
            t, it.consensus_inf, it.dual_inf
        );
    }
}

#[test]
fn probe_basin() {
    use acdc_opf::central::solve_centralized;
    use acdc_opf::nlp::IpmSettings;
    use acdc_opf::AladinInit;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let central = solve_centralized(&net, &IpmSettings::default());
    let xc = &central.solution.x;
    let xs: Vec<Vec<f64>> = dec
        .regions
        .iter()
        .map(|r| r.to_central.iter().map(|&c| xc[c]).collect())
        .collect();
    let mut s1 = AladinSettings::default();
    s1.max_iter = 1;
    s1.eps = 0.0;
    s1.rho = 1e6;
    s1.mu = 1e9;
    let run1 = solve_aladin(
        &dec,
        &s1,
        None,
        Some(AladinInit { zs: xs.clone(), lambda: vec![0.0; dec.q] }),
    );
    let mut s2 = AladinSettings::default();
    s2.max_iter = 12;
    s2.eps = 0.0;
    let probe = solve_aladin(
        &dec,
        &s2,
        None,
        Some(AladinInit { zs: xs.clone(), lambda: run1.lambda.clone() }),
    );
    eprintln!("iterating from (z=x*, lambda=lambda*):");
    for (t, zs) in probe.zs_history.iter().enumerate() {
        let zerr = zs
            .iter()
            .zip(&xs)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()))
            .fold(0.0f64, f64::max);
        let xerr = probe.xs_history[t]
            .iter()
            .zip(&xs)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()))
            .fold(0.0f64, f64::max);
        eprintln!(
            "  t={:2} |x-x*|={:9.3e} |z+-x*|={:9.3e} cons={:9.3e} dual={:9.3e}",
            t,
            xerr,
            zerr,
            probe.run.history[t].consensus_inf,
            probe.run.history[t].dual_inf
        );
    }
}

#[test]
fn probe_flap() {
    use acdc_opf::central::solve_centralized;
    use acdc_opf::nlp::IpmSettings;
    use acdc_opf::AladinInit;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let central = solve_centralized(&net, &IpmSettings::default());
    let xc = &central.solution.x;
    let xs: Vec<Vec<f64>> = dec
        .regions
        .iter()
        .map(|r| r.to_central.iter().map(|&c| xc[c]).collect())
        .collect();
    let mut s1 = AladinSettings::default();
    s1.max_iter = 1;
    s1.eps = 0.0;
    s1.rho = 1e6;
    s1.mu = 1e9;
    let run1 = solve_aladin(
        &dec,
        &s1,
        None,
        Some(AladinInit { zs: xs.clone(), lambda: vec![0.0; dec.q] }),
    );
    let mut s2 = AladinSettings::default();
    s2.max_iter = 12;
    s2.eps = 0.0;
    let probe = solve_aladin(
        &dec,
        &s2,
        None,
        Some(AladinInit { zs: xs.clone(), lambda: run1.lambda.clone() }),
    );
    let tau = IpmSettings::default().tau_act;
    let nt = probe.xs_history.len();
    for (l, reg) in dec.regions.iter().enumerate() {
        // inequality rows
        for (i, hrow) in reg.nlp.ineq.iter().enumerate() {
            let vals: Vec<f64> = (0..nt).map(|t| hrow.value(&probe.xs_history[t][l])).collect();
            let acts: Vec<bool> = vals.iter().map(|&v| v >= -tau).collect();
            if acts.iter().any(|&a| a != acts[0]) {
                let pat: String = acts.iter().map(|&a| if a { 'A' } else { '.' }).collect();
                let hmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                eprintln!(
                    "region {} ineq {:3}: pattern {} h in [{:10.3e}, {:10.3e}]",
                    reg.name, i, pat, hmin, hmax
                );
            }
        }
        // bounds
        for v in 0..reg.nlp.n {
            if reg.nlp.lb[v] == reg.nlp.ub[v] {
                continue;
            }
            if reg.nlp.ub[v].is_finite() {
                let vals: Vec<f64> =
                    (0..nt).map(|t| reg.nlp.ub[v] - probe.xs_history[t][l][v]).collect();
                let acts: Vec<bool> = vals.iter().map(|&d| d <= tau).collect();
                if acts.iter().any(|&a| a != acts[0]) {
                    let pat: String = acts.iter().map(|&a| if a { 'A' } else { '.' }).collect();
                    let dmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let dmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    eprintln!(
                        "region {} ub   {:3}: pattern {} dist in [{:10.3e}, {:10.3e}]",
                        reg.name, v, pat, dmin, dmax
                    );
                }
            }
            if reg.nlp.lb[v].is_finite() {
                let vals: Vec<f64> =
                    (0..nt).map(|t| probe.xs_history[t][l][v] - reg.nlp.lb[v]).collect();
                let acts: Vec<bool> = vals.iter().map(|&d| d <= tau).collect();
                if acts.iter().any(|&a| a != acts[0]) {
                    let pat: String = acts.iter().map(|&a| if a { 'A' } else { '.' }).collect();
                    let dmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let dmax = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    eprintln!(
                        "region {} lb   {:3}: pattern {} dist in [{:10.3e}, {:10.3e}]",
                        reg.name, v, pat, dmin, dmax
                    );
                }
            }
        }
    }
}

#[test]
fn probe_gamma() {
    use acdc_opf::central::solve_centralized;
    use acdc_opf::nlp::IpmSettings;
    let net = load_case(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../cases")
            .join("case1.toml"),
    )
    .unwrap();
    let dec = decompose(&net);
    let central = solve_centralized(&net, &IpmSettings::default());
    let reg = dec.regions.last().unwrap();
    assert_eq!(reg.name, "dc");
    for v in 0..reg.nlp.n.min(8) {
        let c = reg.to_central[v];
        eprintln!(
            "dc var {:2} -> central {:4}: x*={:12.6e} lb={:9.3e} ub={:9.3e} gamma_lo={:9.3e} gamma_up={:9.3e}",
            v,
            c,
            central.solution.x[c],
            net_lb(&dec, v),
            net_ub(&dec, v),
            central.solution.gamma_lo[c],
            central.solution.gamma_up[c],
        );
    }
    fn net_lb(dec: &acdc_opf::partition::Decomposition, v: usize) -> f64 {
        dec.regions.last().unwrap().nlp.lb[v]
    }
    fn net_ub(dec: &acdc_opf::partition::Decomposition, v: usize) -> f64 {
        dec.regions.last().unwrap().nlp.ub[v]
    }
}
