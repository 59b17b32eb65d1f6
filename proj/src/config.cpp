#include "vtask/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vtask/error.hpp"

namespace vtask {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string unquote(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
    return t.substr(1, t.size() - 2);
  }
  return t;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": \"" + v + "\" is not a number");
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": \"" + v + "\" is not a non-negative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": \"" + v + "\" is not true or false");
}

void apply_key(const std::string& key, const std::string& raw, PipelineConfig& cfg) {
  const std::string v = unquote(raw);
  auto& f = cfg.filter;
  if (key == "max_objects") {
    f.max_objects = (v == "inf" || v == "unlimited") ? data::kUnlimitedObjects : to_size(key, v);
  } else if (key == "min_object_complexity") {
    f.min_object_complexity = to_double(key, v);
  } else if (key == "min_action_complexity") {
    f.min_action_complexity = to_double(key, v);
  } else if (key == "box_confidence_threshold") {
    f.box_confidence_threshold = to_double(key, v);
  } else if (key == "nms_iou_threshold") {
    f.nms_iou_threshold = to_double(key, v);
  } else if (key == "phrase_confidence_threshold") {
    f.phrase_confidence_threshold = to_double(key, v);
  } else if (key == "class_aware_nms") {
    f.class_aware_nms = to_bool(key, v);
  } else if (key == "filter_texts") {
    f.filter_texts = to_bool(key, v);
  } else if (key == "blacklist") {
    f.blacklist = parse_blacklist(trim(raw));
  } else if (key == "jobs") {
    cfg.jobs = to_size(key, v);
  } else if (key == "heatmap_resolution") {
    cfg.heatmap_resolution = to_size(key, v);
  } else if (key == "strict") {
    cfg.strict = to_bool(key, v);
  } else if (key == "schema_version") {
    cfg.schema_version = static_cast<int>(to_size(key, v));
  } else if (key == "conllu") {
    cfg.conllu = v;
  } else {
    throw ConfigError("unknown configuration key \"" + key + "\"");
  }
}

void apply_tree(const pt::ptree& tree, PipelineConfig& cfg) {
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      apply_key(key, node.data(), cfg);
    } else {
      apply_tree(node, cfg);  // [section] headers only group keys
    }
  }
}

}  // namespace

void validate(const PipelineConfig& cfg) {
  data::validate(cfg.filter);
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (cfg.heatmap_resolution < 1) throw ConfigError("heatmap_resolution must be at least 1");
  if (cfg.schema_version != io::kSchemaVersion) {
    throw ConfigError("unsupported schema version " + std::to_string(cfg.schema_version) +
                      " (this build reads version " + std::to_string(io::kSchemaVersion) + ")");
  }
}

std::set<std::string> parse_blacklist(std::string_view value) {
  std::string s = trim(value);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::set<std::string> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    const std::string phrase = data::case_fold(unquote(item));
    if (!phrase.empty()) out.insert(phrase);
  }
  return out;
}

namespace {

// Drops a trailing # comment that sits outside quotes.
std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote != 0) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

void apply_config_text(std::string_view text, PipelineConfig& cfg) {
  std::istringstream lines{std::string(text)};
  std::string cleaned;
  for (std::string line; std::getline(lines, line);) cleaned += strip_comment(line) + "\n";
  std::istringstream is{cleaned};
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  apply_tree(tree, cfg);
}

void apply_config_file(const std::string& path, PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(buf.str(), cfg);
}

}  // namespace vtask
