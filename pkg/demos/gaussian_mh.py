"""Trace Metropolis-Hastings for the mean of five noisy readings."""
import statistics

from modinf import trace_mh
from modinf.models import GAUSSIAN_MEAN_DATA, gaussian_mean
from modinf.oracle import batch_means_se, normal_normal_posterior

mu, var = normal_normal_posterior(0.0, 1.0, 1.0, GAUSSIAN_MEAN_DATA)
xs = trace_mh(gaussian_mean(), 20000, 2000, seed=1)
print(f"posterior mean {mu:.4f}, chain {statistics.fmean(xs):.4f} +- {batch_means_se(xs):.4f}")
print(f"posterior var  {var:.4f}, chain {statistics.pvariance(xs):.4f}")
