from hypothesis import settings

# property tests are cheap but shared machines stall unpredictably
settings.register_profile("ci", deadline=None)
settings.load_profile("ci")
