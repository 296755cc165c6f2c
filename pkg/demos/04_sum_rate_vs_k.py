"""
Comparing schedulers as the network grows
==========================================

A reduced version of the sum-rate study: train each scheme's parameters on
half of the drops, report on the other half. The full study runs from the
command line with ``d2dsched sum-rate``.
"""

from d2dsched.harness import ExperimentSpec, evaluate, train_parameters

spec = ExperimentSpec(k_values=(50, 200, 800), num_drops=40)

for k in spec.k_values:
    params = train_parameters(spec, k)
    res = evaluate(spec, k, params)
    print(f"K = {k}   gamma* = {params['gamma_star']:.3f}")
    ranked = sorted(res.stats.values(), key=lambda s: -s.mean_sum_rate)
    for s in ranked:
        print(f"  {s.scheme:12s} {s.mean_sum_rate:8.1f} +- {s.stderr:4.1f}   "
              f"silent {s.fraction_inactive:5.1%}   checks {s.mean_checks:9.0f}")
    print(f"  gain over ITLinQ {res.gain('proposed', 'itlinq'):+.1%}, "
          f"over FlashLinQ {res.gain('proposed', 'flashlinq'):+.1%}")
