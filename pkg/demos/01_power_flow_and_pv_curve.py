"""Solve the 9-bus case, then trace its PV curve up to the nose."""
import numpy as np

from tddi import InjectionSet, margin, read_case, run_cpf, solve_pf

net = read_case("case9")
sol = solve_pf(net, InjectionSet.from_network(net))
print(f"converged in {sol.iterations} iterations, max mismatch {sol.max_mismatch:.1e}")
for b, vm, va in zip(net.buses, sol.vm, np.degrees(sol.va)):
    print(f"  bus {b.id}: |V| = {vm:.4f}  angle = {va:7.3f} deg")

# scale every load (and non-slack generation) by 1 + lambda until collapse
trace = run_cpf(net)
print(f"\n{len(trace.points)} points, nose at lambda = {trace.nose.lam:.4f}")
print(f"loading margin: {margin(trace):.1f} MW")
print(f"|V5| at the nose: {abs(trace.nose.solution.v[net.index(5)]):.3f} p.u.")

# a coarse PV curve for bus 5
for mw, v in zip(trace.total_load_mw[::4], trace.voltage(5)[::4]):
    print(f"  {mw:7.1f} MW  {abs(v):.3f}  " + "#" * int(40 * abs(v)))
