"""Process graph / text consistency checking."""

import json

try:
    from . import _tracenet as _core
except ImportError:  # build tree on PYTHONPATH
    import _tracenet as _core

Error = _core.Error
FormatError = _core.FormatError
IoError = _core.IoError
SchemaError = _core.SchemaError
ValidationError = _core.ValidationError

normalize_graph = _core.normalize_graph
flatten_tree = _core.flatten_tree
enumerate_traces = _core.enumerate_traces
sample_traces = _core.sample_traces
generate_tree = _core.generate_tree
generate_text = _core.generate_text
bp_similarity = _core.bp_similarity
quantile_loss = _core.quantile_loss
mean_absolute_error = _core.mean_absolute_error
huffman_code_length = _core.huffman_code_length


def baseline(n, seed=0):
    return json.loads(_core.baseline(n, seed))


def gradcheck(seed=0, seeds=2):
    return json.loads(_core.gradcheck(seed, seeds))


def gen(out_dir, seed=0, graphs=10, variants=3):
    return json.loads(_core.gen(seed, str(out_dir), graphs, variants))


def embed(out_dir, dataset, seed=0, mode="tracewalk", dim=100, epochs=5):
    return json.loads(_core.embed(seed, str(out_dir), str(dataset), mode, dim, epochs))


def train(out_dir, dataset, node_vectors, word_vectors, seed=0, **model):
    """Model keys follow the model.json "config" section."""
    return json.loads(
        _core.train(seed, str(out_dir), str(dataset), str(node_vectors), str(word_vectors), json.dumps(model))
    )


def evaluate(out_dir, dataset, model_dir, seed=0, tasks="all", split="test"):
    return json.loads(_core.eval(seed, str(out_dir), str(dataset), str(model_dir), tasks, split))
