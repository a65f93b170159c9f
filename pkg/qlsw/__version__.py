__title__ = "qlsw"
__url__ = ""
__author__ = "(unknown)"
__email__ = ""
__license__ = "MIT License"
__version__ = "0.1.0"
__description__ = "Workbench for small quantum linear-systems circuits and their photonic realisation."
