"""
plausikit: epistemic plausibility models, their dynamics and bisimulations.
"""
