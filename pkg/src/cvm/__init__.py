"""Compress RBF-kernel SVMs to a small budget of learned support vectors.

Pipeline: train (or import) a kernel SVM, select m of its support vectors
by least angle regression on a least-squares surrogate of the training
objective, then jointly optimize the selected vectors' positions and
coefficients by nonlinear conjugate gradient so the small model matches
the full model's decision values. The result is a drop-in LibSVM-format
model that is orders of magnitude cheaper to evaluate.
"""

from .compress import CostBudget, LarsPath, LarsProblem, build_surrogate, lars_select, select_support_vectors
from .data import Dataset, SplitSpec, generate_circle_synthetic, parse_libsvm, split, standardize, write_libsvm
from .errors import CvmError, DataFormatError, NumericalError
from .evaluate import CurvePoint, accuracy, build_curve, evaluation_cost
from .gsv import CompressedModel, GsvConfig, cvm_grad, cvm_loss, optimize, to_model
from .kernel import RbfKernel, kernel_matrix, rbf, rbf_grad_z
from .model_io import read_model, write_model
from .svm import MultiClassModel, SvmModel, TrainConfig, grid_search, predict_label, predict_score, train, train_one_vs_one

__version__ = "0.1.0"
