"""Daily PM2.5 forecasting: data preparation, ARIMA, additive, neural models and a benchmark harness."""

__version__ = "0.1.0"
