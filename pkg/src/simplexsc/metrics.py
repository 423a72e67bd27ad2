"""Partition-matching evaluation metrics."""

import numpy as np
from scipy.optimize import linear_sum_assignment


def confusion_matrix(pred, truth):
    """Counts of points per (predicted cluster, true class) pair.

    Returns
    -------
    (matrix, pred_values, truth_values)
        ``matrix[r, c]`` counts points with predicted value
        ``pred_values[r]`` and true value ``truth_values[c]``.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("prediction and truth must have equal length")
    pred_values, pred_idx = np.unique(pred, return_inverse=True)
    truth_values, truth_idx = np.unique(truth, return_inverse=True)
    matrix = np.zeros((pred_values.size, truth_values.size), dtype=np.int64)
    np.add.at(matrix, (pred_idx, truth_idx), 1)
    return matrix, pred_values, truth_values


def accuracy(pred, truth):
    """Clustering accuracy under the best cluster-to-class matching.

    The matching maximizing the number of agreeing points is a linear
    assignment on the confusion matrix, so the value is invariant to any
    relabeling of the predicted ids.  ``pred`` may be a ClusterAssignment
    or a plain label array.
    """
    pred = getattr(pred, "labels", pred)
    matrix, _, _ = confusion_matrix(pred, truth)
    rows, cols = linear_sum_assignment(-matrix)
    return float(matrix[rows, cols].sum()) / np.asarray(truth).size
