"""Model checking workbench for Halpern-Shoham interval temporal logic over finite Kripke structures."""
