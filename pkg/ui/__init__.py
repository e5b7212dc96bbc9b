"""Terminal output for the seqsurf CLI"""
from .console import confirm, console, print_error, print_line, print_table, summary_table

__all__ = ['confirm', 'console', 'print_error', 'print_line', 'print_table', 'summary_table']
