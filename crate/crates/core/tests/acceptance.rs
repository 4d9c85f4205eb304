//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ehtx::config::{ExperimentConfig, PolicyName, Scenario};
use ehtx::experiment::{run_ofdma, run_sweep_horizon, run_sweep_lambda, ExperimentResult};
use ehtx::multichannel::{compute_p_ee_mc, reduced_rate, solve_offline_mc, water_fill};
use ehtx::offline::{dp_oracle, solve_offline, solve_staircase, OracleConfig};
use ehtx::online::{p_star_zero, simulate, ArrivalStats, Policy, PolicyKind};
use ehtx::report;
use ehtx::{compute_p_ee, evaluate_schedule, Arrival, CircuitModel, EnergyProfile, MultiRateModel, RateFunction, RateModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn channel() -> RateModel {
    RateModel::new(1e6, 1e-16, 1.0, 1e-8).unwrap()
}

fn circuit() -> CircuitModel {
    CircuitModel::new(0.1159).unwrap()
}

fn example_profile() -> EnergyProfile {
    let arrivals: Vec<Arrival> = [(4.0, 0.5), (6.0, 0.5), (11.0, 1.0), (14.0, 0.5), (16.0, 0.75), (18.0, 0.5)]
        .iter()
        .map(|&(t, e)| Arrival::new(t, e))
        .collect();
    EnergyProfile::new(0.5, &arrivals, 20.0).unwrap()
}

/// Best-of-`n` wall time of `f`.
fn best_time<T>(n: usize, mut f: impl FnMut() -> T) -> Duration {
    (0..n)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn random_profile(rng: &mut ChaCha8Rng, max_epochs: usize, max_horizon: f64, max_energy: f64) -> EnergyProfile {
    let horizon = rng.random_range(1.0..max_horizon);
    let n = rng.random_range(0..max_epochs);
    let mut times: Vec<f64> = (0..n).map(|_| rng.random_range(0.02..0.98) * horizon).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let arrivals: Vec<Arrival> = times.iter().map(|&t| Arrival::new(t, rng.random_range(0.01..max_energy))).collect();
    EnergyProfile::new(rng.random_range(0.0..max_energy), &arrivals, horizon).unwrap()
}

fn criterion_1() -> Outcome {
    let ee = compute_p_ee(&channel(), &circuit()).map_err(|e| e.to_string())?;
    check((ee.p_ee - 0.0792).abs() <= 1e-4, || format!("p_ee = {} W", ee.p_ee))?;
    let t = best_time(50, || compute_p_ee(&channel(), &circuit()).unwrap());
    check(t < Duration::from_millis(1), || format!("runtime {t:?}"))?;
    Ok(format!("p_ee = {:.4} mW in {t:?}", ee.p_ee * 1e3))
}

fn criterion_2() -> Outcome {
    let p = example_profile();
    let sol = solve_offline(&p, &channel(), &circuit()).map_err(|e| e.to_string())?;
    let mbits = sol.throughput / 1e6;
    check((mbits - 63.14).abs() <= 0.02, || format!("throughput {mbits} Mbit"))?;
    check(sol.i_ee == 3 && p.boundaries()[3] == 11.0, || format!("i_ee = {}", sol.i_ee))?;
    let t = best_time(50, || solve_offline(&p, &channel(), &circuit()).unwrap());
    check(t < Duration::from_millis(10), || format!("runtime {t:?}"))?;
    Ok(format!("{mbits:.4} Mbit, i_ee = 3 (t = 11 s), {t:?}"))
}

fn criterion_3() -> Outcome {
    let st = solve_staircase(&example_profile(), &circuit());
    let mbits = st.schedule.throughput(&channel()) / 1e6;
    check((mbits - 55.80).abs() <= 0.02, || format!("throughput {mbits} Mbit"))?;
    Ok(format!("{mbits:.4} Mbit"))
}

fn criterion_4() -> Outcome {
    let mut parts = Vec::new();
    for (mean_power, target) in [(0.1875, 61.61), (0.150, 61.38), (0.200, 61.60)] {
        let stats = ArrivalStats::from_mean_power(mean_power).unwrap();
        let run = |step| {
            simulate(Policy::Online(PolicyKind::Proposed), &example_profile(), &channel(), &circuit(), &stats, step)
                .map(|t| t.throughput / 1e6)
                .map_err(|e| e.to_string())
        };
        let coarse = run(0.01)?;
        let fine = run(0.001)?;
        check((coarse - target).abs() <= 0.3, || format!("{mean_power} W: {coarse} Mbit vs {target}"))?;
        parts.push(format!("{:.1} mW: {coarse:.3} (10 ms) / {fine:.3} (1 ms)", mean_power * 1e3));
    }
    Ok(parts.join("; "))
}

/// 64 log-spaced powers spanning three decades below the larger of `p_ee`
/// and the highest windowed harvest level, with 50% headroom.
fn power_grid(profile: &EnergyProfile, circuit: &CircuitModel, p_ee: f64, points: usize) -> Vec<f64> {
    let n = profile.num_epochs();
    let mut hi = p_ee;
    for s in 0..n {
        for i in s + 1..=n {
            hi = hi.max(profile.window_average(s, i) - circuit.alpha());
        }
    }
    let hi = 1.5 * hi;
    (0..points).map(|k| hi * 1e-3f64.powf(1.0 - k as f64 / (points - 1) as f64)).collect()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let instances = 50;
    let (mut worst, mut sum_base, mut sum_fine) = (0.0f64, 0.0, 0.0);
    for k in 0..instances {
        let p = random_profile(&mut rng, 3, 10.0, 0.4);
        let alpha = rng.random_range(0.02..0.3);
        let c = CircuitModel::new(alpha).unwrap();
        let p_ee = compute_p_ee(&channel(), &c).map_err(|e| e.to_string())?.p_ee;
        let exact = solve_offline(&p, &channel(), &c).map_err(|e| e.to_string())?.throughput;
        let base = OracleConfig::new(0.05, power_grid(&p, &c, p_ee, 64));
        let fine = base.refined();
        let lo = dp_oracle(&p, &channel(), &c, &base).map_err(|e| e.to_string())?;
        let lo_fine = dp_oracle(&p, &channel(), &c, &fine).map_err(|e| e.to_string())?;
        for sol in [&lo, &lo_fine] {
            let ev = evaluate_schedule(&sol.schedule, &channel(), &c, &p).unwrap();
            check(ev.feasible, || format!("instance {k}: oracle schedule infeasible"))?;
            check(sol.throughput <= exact * (1.0 + 1e-9), || format!("instance {k}: oracle {} > solver {exact}", sol.throughput))?;
        }
        let gap = if exact > 0.0 { (exact - lo.throughput) / exact } else { 0.0 };
        let gap_fine = if exact > 0.0 { (exact - lo_fine.throughput) / exact } else { 0.0 };
        check(gap <= 0.01, || format!("instance {k}: gap {gap}"))?;
        check(gap_fine <= gap + 1e-12, || format!("instance {k}: refined gap {gap_fine} > {gap}"))?;
        worst = worst.max(gap);
        sum_base += gap;
        sum_fine += gap_fine;
    }
    check(sum_fine < sum_base, || "refinement did not shrink the mean gap".into())?;
    let elapsed = start.elapsed();
    check(elapsed <= Duration::from_secs(60), || format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "{instances} instances, max gap {:.3}%, mean gap {:.4}% -> {:.4}% refined, {elapsed:.1?}",
        worst * 100.0,
        sum_base / instances as f64 * 100.0,
        sum_fine / instances as f64 * 100.0
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let instances = 1000;
    for k in 0..instances {
        let p = random_profile(&mut rng, 12, 40.0, 2.0);
        let c = CircuitModel::new(rng.random_range(0.01..0.5)).unwrap();
        let m = RateModel::new(1e6, 1e-16, 1.0, 10f64.powf(rng.random_range(-9.5..-7.0))).unwrap();
        let sol = solve_offline(&p, &m, &c).map_err(|e| e.to_string())?;
        let p_ee = sol.p_ee.unwrap();
        let b = p.boundaries();
        let ev = evaluate_schedule(&sol.schedule, &m, &c, &p).unwrap();
        check(ev.feasible, || format!("instance {k}: infeasible by {}", ev.max_violation))?;

        // one positive power level per epoch
        for i in 0..p.num_epochs() {
            let mut levels: Vec<f64> =
                sol.schedule.segments().iter().filter(|s| s.start >= b[i] && s.end <= b[i + 1] && s.power > 0.0).map(|s| s.power).collect();
            levels.dedup();
            check(levels.len() <= 1, || format!("instance {k}: epoch {} has levels {levels:?}", i + 1))?;
        }

        // EE-phase on-times and exhaustion at every EE boundary
        let draw = p_ee + c.alpha();
        let mut stored = 0.0;
        for i in 0..sol.i_ee {
            stored += p.energies()[i];
            let l = (stored / draw).min(p.lengths()[i]);
            check((sol.ee_on_times[i] - l).abs() <= 1e-9 * l.max(1.0), || format!("instance {k}: on-time {i}"))?;
            stored -= l * draw;
            stored = stored.max(0.0);
        }
        for &j in &sol.ee_boundaries {
            let used = sol.schedule.energy_consumed_until(b[j], &c);
            let had = p.harvested_before(j);
            check((used - had).abs() <= 1e-9 * had.max(1.0), || format!("instance {k}: boundary {j} used {used} of {had}"))?;
        }

        // staircase non-decreasing; energy exhausted when every level is positive
        check(sol.staircase_powers.windows(2).all(|w| w[1] >= w[0] - 1e-12), || format!("instance {k}: staircase decreases"))?;
        if sol.staircase.iter().all(|g| g.level > 0.0) {
            let used = sol.schedule.total_energy(&c);
            check((used - p.total_energy()).abs() <= 1e-9 * p.total_energy().max(1.0), || format!("instance {k}: leftover energy"))?;
        }

        // EE ratio unimodal around p_ee
        let ratio = |x: f64| m.bits_per_second(x) / (x + c.alpha());
        let probes = [0.25, 0.5, 0.9, 0.99];
        check(probes.windows(2).all(|w| ratio(w[0] * p_ee) < ratio(w[1] * p_ee)), || format!("instance {k}: ratio not rising"))?;
        check(probes.windows(2).all(|w| ratio(p_ee / w[0]) < ratio(p_ee / w[1])), || format!("instance {k}: ratio not falling"))?;
    }
    Ok(format!("{instances} instances"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // K = 1 reduction
    for k in 0..50 {
        let gain = 10f64.powf(rng.random_range(-9.5..-7.0));
        let single = RateModel::new(1e6, 1e-16, 1.0, gain).unwrap();
        let multi = MultiRateModel::from_single(&single);
        let c = CircuitModel::new(rng.random_range(0.01..0.5)).unwrap();
        let a = compute_p_ee(&single, &c).unwrap().p_ee;
        let b = compute_p_ee_mc(&multi, &c).unwrap().p_ee();
        check((a - b).abs() <= 1e-5 * a, || format!("draw {k}: p_ee {a} vs {b}"))?;
        let p = random_profile(&mut rng, 8, 30.0, 1.5);
        let s1 = solve_offline(&p, &single, &c).unwrap();
        let sk = solve_offline_mc(&p, &multi, &c).unwrap();
        check((s1.throughput - sk.throughput).abs() <= 1e-5 * s1.throughput.max(1.0), || format!("draw {k}: throughput"))?;
        for t in s1.schedule.segments().iter().map(|s| 0.5 * (s.start + s.end)) {
            let x = s1.schedule.power_at(t);
            let y = sk.schedule.total_schedule().power_at(t);
            check((x - y).abs() <= 1e-5 * x.max(1e-3), || format!("draw {k}: power at {t}: {x} vs {y}"))?;
        }
    }
    // water-filling optimality
    let draws = 1000;
    let mut worst: f64 = 0.0;
    for k in 0..draws {
        let n = rng.random_range(1..10);
        let gains: Vec<f64> =
            (0..n).map(|_| if rng.random_bool(0.1) { 0.0 } else { 10f64.powf(rng.random_range(-10.0..-7.0)) }).collect();
        if gains.iter().all(|&g| g == 0.0) {
            continue;
        }
        let m = MultiRateModel::new(1e6 / n as f64, 1e-16, 1.0, gains).unwrap();
        let total = 10f64.powf(rng.random_range(-4.0..1.0));
        let w = water_fill(&m, total).unwrap();
        let r = w.kkt_residual(&m, total);
        worst = worst.max(r);
        check(r <= 1e-9, || format!("draw {k}: KKT residual {r}"))?;
        // monotone and concave reduced rate
        let (a, b) = (total, total * rng.random_range(1.1..3.0));
        let (ra, rb, rm) = (reduced_rate(&m, a).unwrap(), reduced_rate(&m, b).unwrap(), reduced_rate(&m, 0.5 * (a + b)).unwrap());
        check(rb > ra, || format!("draw {k}: not increasing"))?;
        check(rm >= 0.5 * (ra + rb) * (1.0 - 1e-12), || format!("draw {k}: not concave"))?;
    }
    Ok(format!("K=1 reduction on 50 draws; max KKT residual {worst:.2e} W over {draws} draws"))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let instances = 200;
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let p = random_profile(&mut rng, 10, 30.0, 2.0);
        let c = CircuitModel::new(rng.random_range(0.01..0.5)).unwrap();
        let sol = solve_offline(&p, &channel(), &c).unwrap();
        let d = (p_star_zero(&p, sol.p_ee.unwrap(), &c) - sol.initial_power()).abs();
        worst = worst.max(d);
        check(d <= 1e-9, || format!("instance {k}: differs by {d} W"))?;
    }
    Ok(format!("{instances} instances, max difference {worst:.1e} W"))
}

fn mean(r: &ExperimentResult, v: f64, p: PolicyName) -> f64 {
    r.mean(v, p).expect("aggregate present")
}

fn timed_sweep(f: impl FnOnce() -> ehtx::Result<ExperimentResult>) -> Result<(ExperimentResult, Duration), String> {
    let start = Instant::now();
    let r = f().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(elapsed <= Duration::from_secs(300), || format!("sweep took {elapsed:?}"))?;
    Ok((r, elapsed))
}

fn criterion_9() -> Outcome {
    use PolicyName::*;
    let mut notes = Vec::new();

    let lambda = ExperimentConfig::default_for(Scenario::SweepLambda);
    let (r, t) = timed_sweep(|| run_sweep_lambda(&lambda))?;
    let (off, pro, eep, enp) = (mean(&r, 0.1, Offline), mean(&r, 0.1, Proposed), mean(&r, 0.1, Eep), mean(&r, 0.1, Enp));
    check(pro >= 0.95 * off && eep >= 0.95 * off, || format!("lambda 0.1: proposed {pro}, eep {eep}, offline {off}"))?;
    check(enp < 0.1 * off, || format!("lambda 0.1: enp {enp}, offline {off}"))?;
    let (off1, pro1, enp1) = (mean(&r, 1.0, Offline), mean(&r, 1.0, Proposed), mean(&r, 1.0, Enp));
    check((pro1 - enp1).abs() <= 0.05 * off1, || format!("lambda 1: proposed {pro1}, enp {enp1}, offline {off1}"))?;
    notes.push(format!("lambda sweep {t:.1?}"));

    for (rate, eep_wins) in [(0.3, true), (1.0, false)] {
        let mut horizon = ExperimentConfig::default_for(Scenario::SweepHorizon);
        horizon.sweep.as_mut().unwrap().arrival_rate_hz = Some(rate);
        let (r, t) = timed_sweep(|| run_sweep_horizon(&horizon))?;
        for &v in &horizon.sweep.as_ref().unwrap().values {
            let (e, n) = (mean(&r, v, Eep), mean(&r, v, Enp));
            check(if eep_wins { e > n } else { n > e }, || format!("horizon sweep at lambda {rate}, T {v}: eep {e}, enp {n}"))?;
        }
        notes.push(format!("horizon sweep at {rate}/s {t:.1?}"));
    }

    let ofdma = ExperimentConfig::default_for(Scenario::Ofdma);
    let (r, t) = timed_sweep(|| run_ofdma(&ofdma))?;
    for &v in &ofdma.sweep.as_ref().unwrap().values {
        let (p, e) = (mean(&r, v, Proposed), mean(&r, v, Eep));
        check(p >= e, || format!("ofdma lambda {v}: proposed {p} < eep {e}"))?;
    }
    notes.push(format!("ofdma sweep {t:.1?}"));
    Ok(notes.join(", "))
}

fn csv_bytes(r: &ExperimentResult) -> Vec<u8> {
    let mut buf = Vec::new();
    report::write_rows(&r.rows, &mut buf).unwrap();
    buf
}

fn criterion_10() -> Outcome {
    let mut checked = Vec::new();
    for scenario in [Scenario::SweepLambda, Scenario::SweepHorizon, Scenario::Ofdma] {
        let mut c = ExperimentConfig::default_for(scenario);
        c.apply_overrides(Some(20241014), Some(12), None);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| ehtx::experiment::run_sweep(scenario, &c)).map(|r| csv_bytes(&r)).map_err(|e| e.to_string())
        };
        let first = run(1)?;
        let again = run(1)?;
        let parallel = run(4)?;
        check(first == again && first == parallel, || format!("{}: CSV differs between runs", scenario.name()))?;
        checked.push(format!("{} ({} bytes)", scenario.name(), first.len()));
    }
    Ok(format!("bit-identical CSV across reruns and thread counts: {}", checked.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 EE-maximizing power", criterion_1),
        ("2 offline optimum", criterion_2),
        ("3 staircase baseline", criterion_3),
        ("4 online example", criterion_4),
        ("5 DP oracle certification", criterion_5),
        ("6 structural invariants", criterion_6),
        ("7 multichannel", criterion_7),
        ("8 initial-power cross-check", criterion_8),
        ("9 sweep trends", criterion_9),
        ("10 determinism", criterion_10),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
