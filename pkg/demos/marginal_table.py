"""
Marginal value of information
=============================

Let a family of signals shrink with a parameter theta.  The slope of
log VoI against log theta tells whether the marginal value is zero,
finite or infinite.
"""

from voinfo.marginal import table2_harness

table = table2_harness()
print(f"{'family':<24}" + "".join(f"{c:>12}" for c in table.columns))
for name, row in zip(table.rows, table.grid()):
    print(f"{name:<24}" + "".join(f"{c:>12}" for c in row))

# the raw slopes behind one row
for (family, regime), rep in table.reports.items():
    if family == "Brownian":
        slope = "none (VoI is zero)" if rep.slope is None else f"{rep.slope:.3f}"
        print(f"Brownian, {regime}: slope {slope} -> {rep.classification}")
