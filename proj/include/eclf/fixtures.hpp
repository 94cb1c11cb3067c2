#pragma once

#include <optional>
#include <string_view>

namespace eclf::fixtures {

/// Monthly MAPE (%) of twelve models on the first city dataset, 2021 test year.
std::string_view table1_d1_csv();
/// Same layout for the second city dataset.
std::string_view table2_d2_csv();

/// Embedded fixture by file name (`table1_d1.csv`, `table2_d2.csv`), if any.
std::optional<std::string_view> by_name(std::string_view file_name);

}  // namespace eclf::fixtures
