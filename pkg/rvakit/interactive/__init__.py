"Module for exporting and viewing recursion traces"
from .traces import trace_to_dot, trace_to_text, save_traces
