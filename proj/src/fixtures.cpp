#include "eclf/fixtures.hpp"

namespace eclf::fixtures {

std::string_view table1_d1_csv() {
    return R"csv(model,m1,m2,m3,m4,m5,m6,m7,m8,m9,m10,m11,m12
X-12-ARIMA,20.02,1.92,6.88,1.24,4.13,0.68,5.15,10.14,13.87,14.19,16.47,15.05
TES,7.05,35.19,1.43,4.37,0.63,4.69,6.59,2.07,3.73,0.34,0.04,2.05
SVR,14.84,19.53,5.39,7.57,2.53,2.40,18.81,18.70,0.05,5.01,0.96,12.09
XGBOOST,8.40,0.11,32.80,0.01,19.42,6.45,2.89,0.91,0.01,3.30,0.00,0.21
LSTM,1.00,14.93,1.69,7.07,6.67,0.29,5.54,0.76,13.34,13.36,6.27,2.43
GRNN,2.23,18.81,3.38,12.40,1.21,5.60,2.26,5.28,14.28,13.75,11.41,4.65
CNN,0.95,49.48,1.86,11.26,0.95,2.29,14.59,2.28,0.77,3.72,4.76,0.95
APLF,28.46,2.30,24.04,15.21,13.71,14.55,19.04,3.06,2.13,4.88,5.96,4.25
NBEATS,3.08,6.15,4.76,9.64,5.37,4.22,2.14,2.69,4.47,4.66,7.06,0.40
TCN,6.99,0.24,5.51,0.11,0.09,0.70,13.80,13.62,2.52,1.60,0.05,4.68
ETS+RD-LSTM,3.59,13.69,1.87,3.11,3.28,2.00,1.07,3.40,2.95,2.97,2.20,1.71
ECLF,3.99,8.79,2.58,0.39,0.14,0.44,0.81,3.66,3.54,2.15,0.46,0.75
)csv";
}

std::string_view table2_d2_csv() {
    return R"csv(model,m1,m2,m3,m4,m5,m6,m7,m8,m9,m10,m11,m12
X-12-ARIMA,18.25,6.95,4.79,2.03,1.18,3.40,4.21,6.96,7.97,18.22,15.86,12.90
TES,6.84,21.20,1.68,5.06,0.25,4.10,7.11,3.12,4.88,3.35,1.01,2.91
SVR,15.99,29.13,4.29,10.04,5.45,1.98,18.73,21.66,4.93,10.51,2.64,15.05
XGBOOST,13.01,0.21,22.95,0.01,10.59,6.75,9.22,3.74,0.99,2.49,0.01,2.90
LSTM,0.28,11.43,2.95,8.95,2.63,1.26,7.87,2.33,11.74,16.36,6.51,4.40
GRNN,2.23,24.52,6.08,13.58,10.90,6.49,0.72,1.17,9.63,19.62,11.88,0.24
CNN,0.64,13.47,8.01,3.68,0.67,0.77,12.90,2.72,3.17,11.00,7.38,10.74
APLF,26.01,2.26,20.91,14.87,16.53,15.34,21.10,2.45,0.41,0.14,3.06,6.62
NBEATS,0.18,11.02,3.85,7.14,3.85,0.71,1.06,3.59,6.29,10.95,6.48,0.40
TCN,1.32,4.34,0.95,1.43,1.73,0.15,10.71,9.85,0.50,2.44,3.85,0.38
ETS+RD-LSTM,2.98,9.04,3.96,4.33,3.51,1.09,2.26,4.06,1.51,5.91,3.42,0.82
ECLF,5.10,6.82,0.55,0.05,0.62,4.31,6.94,1.32,0.31,2.75,0.33,0.00
)csv";
}

std::optional<std::string_view> by_name(std::string_view file_name) {
    const auto slash = file_name.find_last_of('/');
    if (slash != std::string_view::npos) file_name.remove_prefix(slash + 1);
    if (file_name == "table1_d1.csv") return table1_d1_csv();
    if (file_name == "table2_d2.csv") return table2_d2_csv();
    return std::nullopt;
}

}  // namespace eclf::fixtures
