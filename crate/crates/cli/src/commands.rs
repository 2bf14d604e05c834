use softguess::acceptance::{run_all, SuiteOptions};
use softguess::asymptotics::{expansion_cumulant, expansion_moment, side_info_first_order, ExpansionReport};
use softguess::coding::{
    build_optimal_code_l, codeword, cumulant_bounds_l, excess_distortion_prob, expected_length, figure_data,
    linspace, max_length, theorem3_check_l, FigureCase,
};
use softguess::entropy::{
    arimoto_renyi_conditional, conditional_stats, kuzuoka_conditional_smooth, renner_wolf_conditional_zero,
    renyi, shannon, smooth_renyi, source_stats, EntropyOrder,
};
use softguess::guessing::{bounds_l, build_optimal_strategy_l, compare_upper_bounds_l, comparison_is_proven, min_moment_l};
use softguess::io::{joint_source, pmf_source};
use softguess::oracle::{brute_force_min_moment_l, conditional_moment_grid_oracle};
use softguess::side_info::side_info_report_l;
use softguess::{JointPmf, ListSize, Pmf};

use crate::report::{emit, Cell, Record, Report};
use crate::{
    AsymptoticsArgs, CodeArgs, Distortion, EntropyArgs, Failure, FigureArgs, Format, Input, MomentArgs,
    SelftestArgs,
};

type Res = Result<(), Failure>;

enum Source {
    Pmf(Pmf),
    Joint(JointPmf),
}

fn load(input: &Input) -> Result<Source, Failure> {
    match (&input.pmf, &input.joint) {
        (Some(p), None) => Ok(Source::Pmf(pmf_source(p)?)),
        (None, Some(j)) => Ok(Source::Joint(joint_source(j)?)),
        _ => Err(Failure::Usage("give exactly one of --pmf and --joint".into())),
    }
}

impl Distortion {
    fn list(&self) -> Result<ListSize, Failure> {
        match (self.d, self.l) {
            (_, Some(l)) => Ok(ListSize::new(l)?),
            (Some(d), None) => Ok(ListSize::from_distortion(d)?),
            (None, None) => Ok(ListSize::new(1)?),
        }
    }

    /// The distortion to report: as given, or `log2 L`.
    fn bits(&self, l: ListSize) -> f64 {
        self.d.unwrap_or_else(|| l.log2())
    }
}

pub fn entropy(a: EntropyArgs) -> Res {
    let order = EntropyOrder::new(a.alpha)?;
    let smooth = |p: &Pmf| -> Result<f64, Failure> {
        if order.is_shannon() {
            if a.eps != 0.0 {
                return Err(Failure::Usage("smoothing needs alpha < 1".into()));
            }
            return Ok(shannon(p));
        }
        Ok(smooth_renyi(p, order, a.eps)?)
    };
    let mut r = Record::default();
    r.put("alpha", a.alpha).put("eps", a.eps);
    match load(&a.input)? {
        Source::Pmf(p) => {
            let s = source_stats(&p);
            r.put("renyi", renyi(&p, order))
                .put("smooth_renyi", smooth(&p)?)
                .put("shannon", s.h)
                .put("varentropy", s.v)
                .put("third_moment", s.t);
        }
        Source::Joint(j) => {
            order.require_below_one()?;
            let (h, u) = conditional_stats(&j);
            r.put("arimoto_renyi", arimoto_renyi_conditional(&j, order))
                .put("kuzuoka_smooth", kuzuoka_conditional_smooth(&j, order, a.eps)?)
                .put("renner_wolf_zero", renner_wolf_conditional_zero(&j, order))
                .put("marginal_smooth_renyi", smooth(&j.marginal_x())?)
                .put("conditional_shannon", h)
                .put("conditional_varentropy", u);
        }
    }
    emit(&Report::Single(r), &a.output, Format::Json)
}

pub fn moment(a: MomentArgs) -> Res {
    let l = a.dist.list()?;
    let mut r = Record::default();
    match load(&a.input)? {
        Source::Pmf(p) => {
            let m = min_moment_l(&p, a.rho, l, a.eps)?;
            let s = build_optimal_strategy_l(&p, l, a.eps)?;
            let b = bounds_l(&p, a.rho, l, a.eps)?;
            let c = compare_upper_bounds_l(&p, a.rho, l, a.eps)?;
            r.put("moment", m.moment)
                .put("error_prob", m.error_prob)
                .put("rho", a.rho)
                .put("D", a.dist.bits(l))
                .put("eps", a.eps)
                .put("list_size", l.get())
                .put("n_lists", m.n_lists)
                .put("cutoff", m.cutoff)
                .put("pi_cutoff", s.pi[s.cutoff - 1])
                .put("thm1_upper", b.thm1_upper)
                .put("thm1_lower", b.thm1_lower)
                .put("prop2_upper", b.prop2_upper)
                .put("prop2_lower", b.prop2_lower)
                .put("z_bound_tighter", c.z_tighter)
                .put("comparison_proven", comparison_is_proven(l));
            if a.oracle {
                let o = brute_force_min_moment_l(&p, a.rho, l, a.eps)?;
                r.put("oracle", o).put("oracle_match", (o - m.moment).abs() <= 1e-9);
            }
        }
        Source::Joint(j) => {
            let s = side_info_report_l(&j, a.rho, l, a.eps)?;
            r.put("moment", s.exact)
                .put("rho", a.rho)
                .put("D", a.dist.bits(l))
                .put("eps", a.eps)
                .put("list_size", l.get())
                .put("eps_y", Cell::Nums(s.eps_y.clone()))
                .put("thm2_upper", s.thm2_upper)
                .put("thm2_lower", s.thm2_lower)
                .put("prop4_upper", s.prop4_upper)
                .put("prop4_lower", s.prop4_lower);
            if a.oracle {
                let o = conditional_moment_grid_oracle(&j, a.rho, l, a.eps, 1e-5)?;
                r.put("oracle", o).put("oracle_match", (o - s.exact).abs() <= 1e-9);
            }
        }
    }
    emit(&Report::Single(r), &a.output, Format::Json)
}

pub fn code(a: CodeArgs) -> Res {
    let p = pmf_source(&a.pmf)?;
    let l = a.dist.list()?;
    let d = a.dist.bits(l);
    let report = theorem3_check_l(&p, a.rho, l, a.eps)?;
    let c = build_optimal_code_l(&p, l, a.eps)?;
    let b = cumulant_bounds_l(&p, a.rho, l, a.eps)?;
    let mut r = Record::default();
    r.put("lambda", report.lambda_star)
        .put("strict_lower", report.strict_lower)
        .put("upper", report.upper)
        .put("moment", report.moment)
        .put("rho", a.rho)
        .put("D", d)
        .put("eps", a.eps)
        .put("list_size", l.get())
        .put("l_star", c.l_star)
        .put("alpha", c.alpha)
        .put("excess_prob", excess_distortion_prob(&c, &p, l.log2()))
        .put("expected_length", expected_length(&c, &p))
        .put("max_length", u64::from(max_length(&c)))
        .put("z_upper", b.z_upper)
        .put("explicit_upper", b.explicit_upper);
    if a.emit_strings {
        let strings = (1..=c.l_star as u64).map(codeword).collect();
        r.put("codewords", Cell::Texts(strings));
    }
    emit(&Report::Single(r), &a.output, Format::Json)
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--grid expects lo:hi:count (got '{s}')"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && count >= 1) {
        return Err(bad());
    }
    Ok(linspace(lo, hi, count))
}

pub fn figure(a: FigureArgs) -> Res {
    let case: FigureCase = a.case.parse()?;
    let grid = parse_grid(&a.grid)?;
    let rows = figure_data(case, &grid, a.seed)?
        .into_iter()
        .map(|row| {
            let mut r = Record::default();
            r.put("rho", row.rho)
                .put("new_upper", row.new_upper)
                .put("old_upper", row.old_upper)
                .put("lambda_exact", row.lambda_exact);
            r
        })
        .collect();
    emit(&Report::Table(rows), &a.output, Format::Csv)
}

fn parse_range(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("--n expects N, LO..HI or LO:HI (got '{s}')"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match s.split_once("..").or_else(|| s.split_once(':')) {
        Some((lo, hi)) => (num(lo)?, num(hi)?),
        None => (num(s)?, num(s)?),
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

pub fn asymptotics(a: AsymptoticsArgs) -> Res {
    let ns = parse_range(&a.n)?;
    let source = load(&a.input)?;
    let mut rows = Vec::new();
    for n in ns {
        let e: ExpansionReport = match &source {
            Source::Pmf(p) if a.cumulant => expansion_cumulant(p, n, a.rho, a.d, a.eps)?,
            Source::Pmf(p) => expansion_moment(p, n, a.rho, a.d, a.eps)?,
            Source::Joint(_) if a.cumulant => {
                return Err(Failure::Usage("--cumulant applies to --pmf sources only".into()))
            }
            Source::Joint(j) => side_info_first_order(j, n, a.rho, a.d, a.eps)?,
        };
        let mut r = Record::default();
        r.put("n", n)
            .put("exact_per_symbol", e.exact)
            .put("predicted", e.predicted)
            .put("residual", e.residual);
        rows.push(r);
    }
    emit(&Report::Table(rows), &a.output, Format::Csv)
}

pub fn selftest(a: SelftestArgs) -> Res {
    if let Some(spec) = &a.pmf {
        pmf_source(spec)?;
    }
    let mut opts = SuiteOptions { quick: a.quick, ..SuiteOptions::default() };
    if let Some(seed) = a.seed {
        opts.seed = seed;
    }
    let outcomes = run_all(opts);
    for o in &outcomes {
        eprintln!("{}", o.line());
    }
    let criteria: Vec<Record> = outcomes
        .iter()
        .map(|o| {
            let mut r = Record::default();
            r.put("id", u64::from(o.id))
                .put("name", o.name)
                .put("pass", o.pass)
                .put("detail", o.detail.as_str())
                .put("seconds", o.seconds);
            r
        })
        .collect();
    let pass = outcomes.iter().all(|o| o.pass);
    let report = if a.output.format == Some(Format::Csv) {
        Report::Table(criteria)
    } else {
        let mut r = Record::default();
        r.put("pass", pass).put("quick", a.quick).put("seed", opts.seed).put("criteria", Cell::Records(criteria));
        Report::Single(r)
    };
    emit(&report, &a.output, Format::Json)?;
    match outcomes.iter().find(|o| !o.pass) {
        Some(o) => Err(Failure::Property(format!("criterion {} ({}) failed: {}", o.id, o.name, o.detail))),
        None => Ok(()),
    }
}
