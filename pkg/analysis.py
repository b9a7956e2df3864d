"""
Functions for analyzing and summarizing energy estimates
"""

import numpy as np
import pandas as pd
from scipy import stats


def summarize_energy_estimates(energies, exact=None, confidence=0.95):
    """
    Summarize repeated energy estimates (e.g. sampled VQE runs over seeds)

    Parameters:
    energies (list): energy estimates, one per run
    exact (float): reference energy, optional
    confidence (float): level of the normal confidence interval

    Returns:
    dict: Summary statistics
    """
    values = np.asarray(energies, dtype=float)
    if values.size == 0:
        raise ValueError("no energy estimates to summarize")
    mean = float(np.mean(values))
    if values.size > 1:
        std = float(np.std(values, ddof=1))
        sem = float(stats.sem(values))
    else:
        std = sem = 0.0
    if sem > 0:
        low, high = stats.norm.interval(confidence, loc=mean, scale=sem)
    else:
        low = high = mean

    summary = {
        'runs': int(values.size),
        'mean': mean,
        'std': std,
        'sem': sem,
        'ci_low': float(low),
        'ci_high': float(high),
        'min': float(np.min(values)),
        'max': float(np.max(values)),
    }
    if exact is not None:
        summary['exact'] = float(exact)
        summary['bias'] = mean - float(exact)
    return summary


def compare_to_exact(energies, exact):
    """
    One-sample t-test of estimates against the exact energy

    Parameters:
    energies (list): energy estimates
    exact (float): exact energy

    Returns:
    tuple: (t_statistic, p_value, deviation_in_sem)
    """
    values = np.asarray(energies, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two estimates for a t-test")
    sem = stats.sem(values)
    deviation = (np.mean(values) - exact) / sem if sem > 0 else 0.0
    t_stat, p_value = stats.ttest_1samp(values, exact)
    return float(t_stat), float(p_value), float(deviation)


def create_results_table(rows, exact=None):
    """
    Tabulate VQE outcomes the way the reproduction tables list them

    Parameters:
    rows (list): (label, VqeResult) pairs
    exact (float): exact energy, adds an Exact row and an error column

    Returns:
    pandas.DataFrame: Results table
    """
    records = []
    if exact is not None:
        records.append({'Method': 'Exact', 'Energy': f"{exact:.8f}", 'p': '', 'Error': ''})
    for label, result in rows:
        record = {'Method': label, 'Energy': f"{result.energy:.8f}", 'p': f"{result.p:.8f}"}
        if exact is not None:
            record['Error'] = f"{abs(result.energy - exact):.2e}"
        records.append(record)
    return pd.DataFrame(records)


def landscape_comparison(landscape, closed_form):
    """
    Attach the closed-form landscape and the absolute deviation to a sweep

    Parameters:
    landscape (pandas.DataFrame): columns p and energy
    closed_form (numpy.ndarray): closed-form energies on the same grid

    Returns:
    pandas.DataFrame: columns p, energy, closed_form, abs_diff
    """
    table = landscape[['p', 'energy']].copy()
    table['closed_form'] = np.asarray(closed_form, dtype=float)
    table['abs_diff'] = (table['energy'] - table['closed_form']).abs()
    return table
