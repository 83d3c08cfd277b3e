"""
Training the from-scratch MLP
=============================

A float64 multilayer perceptron with ReLU hidden layers, a softmax output
and Adam. Everything is plain numpy.
"""

import numpy as np

from uncdrift.nn import ArchitectureSpec, TrainingSet, accuracy, backward, forward, init_params, predict_proba, train

###############################################################################
# Two noisy blobs make a small classification problem.

rng = np.random.default_rng(0)
labels = rng.integers(0, 2, 600)
features = rng.normal(0, 0.8, (600, 2)) + np.where(labels[:, None] == 1, 1.5, -1.5)
data = TrainingSet(features, labels)

###############################################################################
# The architecture carries the hidden sizes, dropout rate and epoch count.
# Weights start He-normal, so the same seed gives the same network.

arch = ArchitectureSpec((16, 8), input_dim=2, num_classes=2, dropout_rate=0.1, epochs=40)
params = init_params(arch, seed=0)
print("layer shapes:", [w.shape for w in params.weights])

###############################################################################
# Backprop against central differences on one weight, as a quick check.

x, y = features[:4], labels[:4]
grad = backward(params, forward(params, x), y).weights[0][0, 0]
h = 1e-5
w = params.weights[0]
w[0, 0] += h
up = forward(params, x).probs
w[0, 0] -= 2 * h
down = forward(params, x).probs
w[0, 0] += h


def loss(p):
    return -np.mean(np.log(p[np.arange(4), y]))


print(f"analytic {grad:.8f}  numeric {(loss(up) - loss(down)) / (2 * h):.8f}")

###############################################################################
# Train with minibatch Adam. The observer sees the weights after every epoch,
# which is how SWAG collects its iterates.

losses = []
params = train(arch, data, seed=0,
               observer=lambda epoch, p: losses.append(-np.mean(np.log(predict_proba(p, features)[np.arange(600), labels]))))
print(f"loss after epoch 1: {losses[0]:.3f}, after epoch {len(losses)}: {losses[-1]:.3f}")
print(f"training accuracy: {accuracy(params, data):.3f}")
