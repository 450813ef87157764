"""activscope: a desk-scale workbench for interpreting CNN activation features
in lesion-detection patch classification."""

__version__ = "0.1.0"
