"""Scalar-valued closures over each primitive, for finite-difference checks."""

import numpy as np

from mrn.tensor import Tensor, ops


def _param(rng, shape, name, lo=-1.0, hi=1.0):
    return Tensor(rng.uniform(lo, hi, size=shape), requires_grad=True, name=name)


def primitive_cases(seed=0):
    rng = np.random.default_rng(seed)
    cases = {}

    def case(name, build, params):
        # a random projection so each output entry weighs differently in the scalar
        proj = np.random.default_rng(len(cases)).normal(size=build().shape)
        cases[name] = (lambda: ops.sum_(ops.mul(build(), Tensor(proj))), params)

    a, b = _param(rng, (3, 4), "a"), _param(rng, (4, 2), "b")
    case("matmul", lambda: ops.matmul(a, b), [a, b])
    x, y = _param(rng, (3, 4), "x"), _param(rng, (1, 4), "y")
    case("add", lambda: ops.add(x, y), [x, y])
    case("sub", lambda: ops.sub(x, y), [x, y])
    case("mul", lambda: ops.mul(x, y), [x, y])
    d = _param(rng, (1, 4), "d", 0.5, 2.0)
    case("div", lambda: ops.div(x, d), [x, d])
    case("exp", lambda: ops.exp(x), [x])
    pos = _param(rng, (3, 4), "pos", 0.2, 2.0)
    case("log", lambda: ops.log(pos), [pos])
    case("clip", lambda: ops.clip(x, -0.5, 0.5), [x])
    case("leaky_relu", lambda: ops.leaky_relu(x, 0.2), [x])
    case("relu", lambda: ops.relu(x), [x])
    case("sigmoid", lambda: ops.sigmoid(x), [x])
    case("softmax", lambda: ops.softmax(x, axis=-1), [x])
    case("concat", lambda: ops.concat([x, y], axis=0), [x, y])
    case("slice", lambda: ops.slice_(x, (slice(1, 3), slice(None))), [x])
    case("reshape", lambda: ops.reshape(x, (2, 6)), [x])
    case("transpose", lambda: ops.transpose(x), [x])
    case("sum", lambda: ops.sum_(x, axis=0, keepdims=True), [x])
    case("mean", lambda: ops.mean(x, axis=1), [x])
    case("max", lambda: ops.max_(x, axis=1), [x])
    table = _param(rng, (5, 3), "table")
    case("embedding_gather", lambda: ops.embedding_gather(table, [0, 2, 2, 4]), [table])
    case("dropout", lambda: ops.dropout(x, 0.3, True, 7), [x])
    h, attn = _param(rng, (4, 3), "h"), _param(rng, (6,), "attn")
    e = _param(rng, (4, 4, 2), "e", 0.1, 1.0)
    case("edge_attention", lambda: ops.edge_attention(h, attn, e, 0.2, 1e-9), [h, attn, e])
    coef = _param(rng, (4, 4, 2), "coef")
    case("channel_aggregate", lambda: ops.channel_aggregate(coef, h), [h, coef])
    return cases
