#pragma once

#include "kaf/types.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace kaf::cli {

/// Runs the command-line interface. Returns 0 on success, 1 on runtime
/// failures and 2 on usage errors.
int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err);

/// Lead lists in steps: "q", "a,b,c" or the inclusive range "start:step:stop".
std::vector<Index> parse_leads(const std::string &text);

/// Numeric lists with the same syntax as parse_leads.
std::vector<double> parse_values(const std::string &text);

/// Flags read from a "key = value" file, one option per line. Keys name long
/// options without the leading dashes; '#' starts a comment.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};
std::vector<ConfigEntry> read_config(const std::string &path);

} // namespace kaf::cli
