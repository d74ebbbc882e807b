"""Published benchmark figures for the twelve Beijing stations.

Per-station values are (RMSE, MAE, MAPE, RRSE); the ARIMA entries also carry
the reported (p, d, q) order. The additive family is listed under its
original tool name, FBProphet.
"""
from __future__ import annotations

FAMILY_NAMES = {"additive": "FBProphet", "arima": "ARIMA", "lstm": "LSTM", "cnn": "CNN"}

STATION_METRICS = {
    "Aotizhongxin": {"additive": (20.1, 13.2, 29.8, 0.27), "arima": (21.0, 14.2, 33.4, 0.29),
                     "lstm": (19.2, 12.4, 21.2, 0.26), "cnn": (25.0, 15.9, 25.5, 0.34)},
    "Changping": {"additive": (18.9, 13.2, 37.0, 0.30), "arima": (19.2, 13.3, 34.8, 0.30),
                  "lstm": (18.8, 12.7, 28.0, 0.30), "cnn": (20.2, 14.0, 37.1, 0.32)},
    "Dingling": {"additive": (35.6, 16.5, 45.3, 0.53), "arima": (35.1, 16.2, 34.8, 0.52),
                 "lstm": (35.6, 15.2, 22.8, 0.53), "cnn": (36.7, 16.4, 29.5, 0.54)},
    "Dongsi": {"additive": (20.5, 15.1, 33.2, 0.26), "arima": (19.8, 14.1, 27.5, 0.25),
               "lstm": (21.3, 13.2, 17.9, 0.27), "cnn": (22.0, 16.1, 26.9, 0.28)},
    "Guanyuan": {"additive": (20.2, 15.0, 34.5, 0.27), "arima": (20.2, 14.7, 31.5, 0.27),
                 "lstm": (18.8, 12.5, 20.3, 0.25), "cnn": (21.3, 14.2, 25.6, 0.28)},
    "Gucheng": {"additive": (20.7, 15.0, 36.2, 0.27), "arima": (20.6, 14.6, 31.2, 0.27),
                "lstm": (22.2, 15.2, 23.9, 0.29), "cnn": (23.2, 14.3, 22.5, 0.30)},
    "Huairou": {"additive": (18.5, 12.2, 35.3, 0.30), "arima": (19.9, 12.3, 27.6, 0.33),
                "lstm": (17.2, 11.9, 32.5, 0.29), "cnn": (18.9, 14.0, 38.7, 0.31)},
    "Nongzhanguan": {"additive": (20.7, 15.3, 35.4, 0.27), "arima": (20.3, 14.4, 29.4, 0.27),
                     "lstm": (18.9, 13.2, 20.3, 0.25), "cnn": (19.8, 14.0, 21.7, 0.26)},
    "Shunyi": {"additive": (19.8, 13.9, 32.6, 0.28), "arima": (19.9, 13.9, 29.0, 0.28),
               "lstm": (19.8, 12.6, 23.9, 0.28), "cnn": (22.2, 14.0, 25.6, 0.31)},
    "Tiantan": {"additive": (20.6, 14.7, 32.6, 0.28), "arima": (19.6, 13.4, 26.4, 0.27),
                "lstm": (16.6, 11.5, 19.6, 0.23), "cnn": (18.4, 12.5, 19.4, 0.25)},
    "Wanliu": {"additive": (19.6, 14.7, 38.3, 0.27), "arima": (19.3, 14.2, 34.0, 0.27),
               "lstm": (23.9, 15.9, 23.3, 0.33), "cnn": (23.4, 13.9, 22.6, 0.33)},
    "Wanshouxigong": {"additive": (19.3, 13.9, 26.4, 0.24), "arima": (19.5, 14.0, 26.4, 0.25),
                      "lstm": (17.8, 12.5, 18.7, 0.23), "cnn": (18.3, 12.8, 21.1, 0.23)},
}

ARIMA_ORDERS = {
    "Aotizhongxin": (1, 0, 3), "Changping": (2, 0, 0), "Dingling": (2, 0, 0), "Dongsi": (1, 0, 0),
    "Guanyuan": (2, 0, 0), "Gucheng": (1, 0, 0), "Huairou": (1, 0, 1), "Nongzhanguan": (1, 0, 1),
    "Shunyi": (4, 0, 0), "Tiantan": (1, 0, 0), "Wanliu": (1, 0, 0), "Wanshouxigong": (1, 0, 0),
}

AVERAGES = {
    "additive": (21.2, 14.4, 34.7, 0.295),
    "arima": (21.2, 14.1, 30.5, 0.308),
    "lstm": (20.8, 13.2, 22.7, 0.292),
    "cnn": (22.4, 14.3, 26.3, 0.312),
}

ACTIVATION_AVERAGES = {
    "tanh": (22.9, 14.4, 25.9, 0.320),
    "relu": (21.2, 13.3, 22.9, 0.297),
}
