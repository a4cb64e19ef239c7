#pragma once

#include <incubation/smooth.hpp>
#include <incubation/version.hpp>

#include "json.hpp"

#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

namespace incubation::cli {

using nlohmann::json;

//! Provenance block attached to every output.
struct RunManifest
{
  std::string command;
  json parameters = json::object();
  std::uint64_t seed = 0;
  std::string input_digest;
  std::string version = incubation::version;

  json to_json() const
  {
    return json{ { "command", command },
                 { "parameters", parameters },
                 { "seed", seed },
                 { "input_digest", input_digest },
                 { "version", version } };
  }
};

inline std::string hex_digest(std::string_view bytes)
{
  const std::uint64_t h = fnv1a(bytes.data(), bytes.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

inline std::string format_double(double v)
{
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

//! CSV with a leading comment line carrying the manifest.
class CsvWriter
{
public:
  CsvWriter(const RunManifest& manifest, std::initializer_list<std::string_view> header)
  {
    out_ << "# manifest: " << manifest.to_json().dump() << '\n';
    bool first = true;
    for (auto h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }

  template <class... T>
  void row(const T&... values)
  {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }

  std::ostringstream out_;
};

} // namespace incubation::cli
