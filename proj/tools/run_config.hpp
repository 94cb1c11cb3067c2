#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "eclf/evalstat.hpp"
#include "eclf/pipeline.hpp"
#include "eclf/synth.hpp"

namespace eclf::cli {

struct KeySpec {
    std::string name;
    std::string section;
    std::string default_value;
    std::string help;
};

/// Flat key=value settings grouped in sections. Every key is unique across
/// sections, so it doubles as the name of a command-line flag.
class RunConfig {
public:
    RunConfig();

    static const std::vector<KeySpec>& keys();

    /// Reads `[section]` headers and `key = value` lines; `#` starts a comment.
    /// ConfigError on unknown keys or keys placed under the wrong section.
    void load_file(const std::string& path);
    void load_text(const std::string& text, const std::string& origin = "<config>");
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_list(const std::string& key) const;

    EclfConfig eclf() const;
    SynthConfig synth() const;

    /// Config echo grouped by section, for run manifests.
    nlohmann::json to_json() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace eclf::cli
