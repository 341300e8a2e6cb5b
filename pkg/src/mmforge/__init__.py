"""mmforge: desk-scale multimodal-LLM tooling.

Subpackages:
    numcore    dense float64 tensors with a recorded-operation gradient tape
    connector  spatial latent-query aggregator and baseline connectors
    cvbench    vision-centric VQA item generation and scoring
    curate     instruction-data pool balancing, mixing, hashing, data engine
    evalkit    answer grading and benchmark analytics
    review     HTTP review service backed by an append-only decision journal
"""

__version__ = "0.1.0"
