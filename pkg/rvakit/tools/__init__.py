"Gradient checking and the multi-seed ablation experiment"
from .gradcheck import gradcheck, finite_diff_check, check_ops
from .experiment import experiment
