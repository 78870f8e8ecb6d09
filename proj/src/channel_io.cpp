#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "wtcap/channel.hpp"
#include "wtcap/error.hpp"

namespace wtcap {
namespace {

using json = nlohmann::json;

Matrix parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  Index cols = -1;
  Matrix m;
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.empty()) {
      throw ParseError(where + ": row " + std::to_string(r) + " is not a non-empty array");
    }
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw ParseError(where + ": ragged rows (row " + std::to_string(r) + " has " +
                       std::to_string(row.size()) + " entries, expected " + std::to_string(cols) + ")");
    }
    for (Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw ParseError(where + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                         ") is not a number");
      }
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

std::vector<Matrix> parse_matrix_list(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const json& arr = doc.at(key);
  if (!arr.is_array()) throw ParseError(std::string("field '") + key + "' must be an array of matrices");
  std::vector<Matrix> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(parse_matrix(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

double parse_power(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + " must be a number");
  return v.get<double>();
}

}  // namespace

ChannelSet load_channel(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("channel spec must be a JSON object");
  if (!doc.contains("H1")) throw ParseError("missing field 'H1'");
  Matrix h1 = parse_matrix(doc.at("H1"), "H1");
  auto evs = parse_matrix_list(doc, "evs");
  std::vector<Matrix> prs;
  if (doc.contains("prs")) prs = parse_matrix_list(doc, "prs");
  if (!doc.contains("P_T")) throw ParseError("missing field 'P_T'");
  const double p_t = parse_power(doc.at("P_T"), "P_T");
  std::vector<double> p_i;
  if (doc.contains("P_I")) {
    const json& arr = doc.at("P_I");
    if (!arr.is_array()) throw ParseError("P_I must be an array");
    for (std::size_t j = 0; j < arr.size(); ++j) {
      p_i.push_back(parse_power(arr[j], "P_I[" + std::to_string(j) + "]"));
    }
  }
  return ChannelSet(std::move(h1), std::move(evs), std::move(prs), p_t, std::move(p_i));
}

ChannelSet load_channel_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open channel file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_channel(ss.str());
}

}  // namespace wtcap
