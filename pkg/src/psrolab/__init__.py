"""Normal-form zero-sum game laboratory for PSRO and its variants."""
