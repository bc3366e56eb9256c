import sys

from colorama import Fore, Style
from tabulate import tabulate

from data.models import BoundReport, ExperimentSummary, KsCheckResult, OvershootSummary, SweepRow, TailCheckResult, Verdict

VERDICT_COLORS = {
    Verdict.INSIDE_BRACKET: Fore.GREEN,
    Verdict.BELOW_LOWER: Fore.RED,
    Verdict.ABOVE_UPPER: Fore.RED,
    Verdict.INVALID_CENSORING: Fore.MAGENTA,
    Verdict.NOT_APPLICABLE: Fore.YELLOW,
}


def _echo(text: str = "") -> None:
    # Standard output carries the machine-readable result only
    print(text, file=sys.stderr)


def _fmt(value, digits: int = 6) -> str:
    if value is None:
        return f"{Fore.YELLOW}n/a{Style.RESET_ALL}"
    if isinstance(value, bool):
        return f"{Fore.GREEN}yes{Style.RESET_ALL}" if value else f"{Fore.RED}no{Style.RESET_ALL}"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def _title(text: str) -> None:
    _echo(f"\n{Fore.WHITE}{Style.BRIGHT}{text}{Style.RESET_ALL}")


def warn(message: str) -> None:
    _echo(f"{Fore.YELLOW}Warning: {message}{Style.RESET_ALL}")


def error(message: str) -> None:
    _echo(f"{Fore.RED}Error: {message}{Style.RESET_ALL}")


def print_bound_report(report: BoundReport) -> None:
    """Print the evaluated bounds and any failed hypotheses."""
    _title(f"BOUNDS ({report.mode.value}, {report.variant.value} lower bound):")
    rows = [
        ["Upper", _fmt(report.upper), _fmt(report.hypotheses_ok.upper)],
        [f"Lower (n = {report.lower_best_n})", _fmt(report.lower), _fmt(report.hypotheses_ok.lower)],
        ["Main term", _fmt(report.main_term), _fmt(report.hypotheses_ok.main_term)],
        ["Estimate c = 0", _fmt(report.estimate_c0), ""],
        ["Estimate c = 1", _fmt(report.estimate_c1), ""],
        ["Floor of E(eta - tau)", _fmt(report.eta_minus_tau_floor), ""],
    ]
    if report.regime:
        rows.append([f"Regime (q = {report.regime.q:g})", f"{report.regime.drift_regime:.6g} / {report.regime.noise_regime:.6g}", _fmt(report.regime.ratio_ok)])
    _echo(tabulate(rows, headers=[f"{Fore.WHITE}Quantity", "Value", "Hypotheses"], tablefmt="grid", colalign=("left", "right", "center")))
    for failure in report.failures:
        _echo(f"{Fore.RED}✗ {failure}{Style.RESET_ALL}")


def print_experiment_summary(summary: ExperimentSummary) -> None:
    p = summary.params
    color = VERDICT_COLORS[summary.verdict]
    _title(f"EXPERIMENT: {Fore.CYAN}l={p.l:g} s={p.s:g} eps={p.eps:g} c={summary.c:.6g} ({p.mode.value}){Style.RESET_ALL}")
    rows = [
        ["Trials", summary.n_trials],
        ["Censored", f"{summary.n_censored} ({summary.censored_fraction:.4%})"],
        ["E|eta - tau|", f"{_fmt(summary.mean_abs_dev)} ± {_fmt(summary.ci_halfwidth_abs_dev, 3)}"],
        ["E(eta - tau)", f"{_fmt(summary.mean_dev)} ± {_fmt(summary.ci_halfwidth_mean_dev, 3)}"],
        ["E(eta - tau)+", _fmt(summary.mean_pos_dev)],
        ["P(eta < tau)", _fmt(summary.prob_eta_early)],
        ["E R, E R^2", f"{_fmt(summary.mean_overshoot)}, {_fmt(summary.mean_sq_overshoot)}"],
        ["E tau", _fmt(summary.mean_tau)],
        ["Bracket", f"[{_fmt(summary.bound_report.lower)}, {_fmt(summary.bound_report.upper)}]"],
        ["Verdict", f"{color}{summary.verdict.value.upper()}{Style.RESET_ALL}"],
    ]
    _echo(tabulate(rows, tablefmt="grid", colalign=("left", "right")))


def print_sweep_rows(rows: list[SweepRow]) -> None:
    _title("SWEEP:")
    table = []
    for row in rows:
        if row.error:
            table.append([row.row_index, _fmt(row.l), _fmt(row.s), _fmt(row.eps), "", "", "", f"{Fore.RED}{row.error}{Style.RESET_ALL}"])
            continue
        summary = row.summary
        table.append(
            [
                row.row_index,
                _fmt(row.l),
                _fmt(row.s),
                _fmt(row.eps),
                _fmt(row.c),
                _fmt(summary.mean_abs_dev),
                _fmt(row.ratio_to_main_term, 4),
                f"{VERDICT_COLORS[summary.verdict]}{summary.verdict.value}{Style.RESET_ALL}",
            ]
        )
    _echo(
        tabulate(
            table,
            headers=["Row", "l", "s", "eps", "c", "E|eta - tau|", "Ratio", "Verdict"],
            tablefmt="grid",
            colalign=("right", "right", "right", "right", "right", "right", "right", "left"),
        )
    )


def print_tail_result(result: TailCheckResult) -> None:
    _title(f"TAIL CHECK: {Fore.CYAN}h={result.h:g}, {result.n_trials} trials{Style.RESET_ALL}")
    table = [
        [_fmt(t), _fmt(p), _fmt(o), _fmt(ok), _fmt(m), _fmt(mo)]
        for t, p, o, ok, m, mo in zip(result.times, result.survival, result.survival_oracle, result.within_3se, result.truncated_sqrt_mean, result.truncated_sqrt_oracle)
    ]
    _echo(tabulate(table, headers=["t", "P(tau > t)", "Oracle", "Within 3 SE", "E sqrt(tau ^ t)", "Oracle"], tablefmt="grid"))
    _echo(f"Slope: {Fore.YELLOW}{result.slope:.4f} ± {result.slope_stderr:.4f}{Style.RESET_ALL} over t in [{result.fit_window[0]:g}, {result.fit_window[1]:g}]")
    if result.low_survivors:
        warn("fewer than 100 trials survive the last checkpoint; slope stderr widened")


def print_overshoot_summary(summary: OvershootSummary) -> None:
    spec = summary.spec
    _title(f"OVERSHOOT: {Fore.CYAN}s={spec.step_mean:g} sigma={spec.step_std:g} l={spec.level:g}{Style.RESET_ALL}")
    rows = [
        ["E R", f"{_fmt(summary.mean_overshoot)} ± {_fmt(summary.se_overshoot, 3)}", _fmt(summary.mean_bound), _fmt(summary.mean_ok)],
        ["E R^2", f"{_fmt(summary.mean_sq_overshoot)} ± {_fmt(summary.se_sq_overshoot, 3)}", _fmt(summary.moment_bound), _fmt(summary.moment_ok)],
        ["E mu", f"{_fmt(summary.mean_time)} ± {_fmt(summary.se_time, 3)}", f"[{_fmt(summary.wald_bracket[0])}, {_fmt(summary.wald_bracket[1])}]", _fmt(summary.wald_ok)],
    ]
    if summary.lemma_bounds:
        rows += [
            ["E(s mu - l)+", f"{_fmt(summary.mean_pos_time_dev)} ± {_fmt(summary.se_pos_time_dev, 3)}", _fmt(summary.lemma_bounds[0]), ""],
            ["E|s mu - l|", f"{_fmt(summary.mean_abs_time_dev)} ± {_fmt(summary.se_abs_time_dev, 3)}", _fmt(summary.lemma_bounds[1]), ""],
            ["E(S_mu - s mu)+", f"{_fmt(summary.mean_pos_noise)} ± {_fmt(summary.se_pos_noise, 3)}", _fmt(summary.lemma_bounds[2]), _fmt(summary.lemma_ok)],
        ]
    _echo(tabulate(rows, headers=[f"{Fore.WHITE}Quantity", "Empirical", "Bound", "OK"], tablefmt="grid", colalign=("left", "right", "right", "center")))


def print_ks_result(result: KsCheckResult) -> None:
    _title("INVERSE-GAUSSIAN CHECK:")
    rows = [["KS distance", _fmt(result.statistic)], ["Trials used", result.n], ["Censored", result.n_censored], ["E tau", _fmt(result.mean_tau)], ["Oracle mean", _fmt(result.oracle_mean)]]
    _echo(tabulate(rows, tablefmt="grid", colalign=("left", "right")))
