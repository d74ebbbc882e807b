"""Numpy LSTM and 1-D CNN regressors with hand-written backpropagation."""
