#include "lcrasch/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace lcrasch {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, delim)) out.push_back(trim(cell));
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

int parse_int(const std::string& cell, const std::string& where) {
  int value = 0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ValidationError(where + ": expected an integer code, got '" + cell + "'");
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::set<int> parse_code_set(const std::string& text, const std::string& where) {
  const auto open = text.find('{');
  const auto close = text.find('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ValidationError(where + ": expected a {codes} set");
  std::set<int> codes;
  for (const auto& tok : split(text.substr(open + 1, close - open - 1), ',')) {
    if (tok.empty()) continue;
    codes.insert(parse_int(tok, where));
  }
  return codes;
}

}  // namespace

const ItemSchema* TableSchema::find(const std::string& label) const {
  for (const auto& item : items)
    if (item.label == label) return &item;
  return nullptr;
}

RawTable load_responses(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line))
    throw ValidationError(path + ": empty file, header row required");
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';

  RawTable raw;
  raw.labels = split(line, delim);
  for (const auto& label : raw.labels)
    if (label.empty())
      throw ValidationError(path + ": empty item label in header");

  long long lineno = 1;
  while (std::getline(lines, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, delim);
    if (cells.size() != raw.labels.size()) {
      std::ostringstream msg;
      msg << path << ": row " << lineno << " has " << cells.size()
          << " cells, expected " << raw.labels.size();
      throw ValidationError(msg.str());
    }
    std::vector<int> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j] == "NA") {
        row[j] = RawTable::kMissingCode;
      } else {
        std::ostringstream where;
        where << path << ": row " << lineno << ", item " << raw.labels[j];
        row[j] = parse_int(cells[j], where.str());
      }
    }
    raw.rows.push_back(std::move(row));
  }
  return raw;
}

void validate_table(const RawTable& raw, const TableSchema& schema) {
  for (int j = 0; j < raw.column_count(); ++j) {
    const ItemSchema* item = schema.find(raw.labels[j]);
    if (!item)
      throw ValidationError("no schema entry for item " + raw.labels[j]);
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
      const int code = raw.rows[r][j];
      std::ostringstream where;
      where << "row " << (r + 2) << ", item " << raw.labels[j];
      if (code == RawTable::kMissingCode) {
        if (!item->allow_missing)
          throw ValidationError(where.str() + ": missing response not allowed");
      } else if (!item->valid_codes.count(code)) {
        throw ValidationError(where.str() + ": code " + std::to_string(code) +
                              " outside the declared categories");
      }
    }
  }
}

RawTable load_responses(const std::string& path, const TableSchema& schema) {
  RawTable raw = load_responses(path);
  validate_table(raw, schema);
  return raw;
}

RuleSet parse_rules(const std::string& text, const std::string& origin) {
  RuleSet rules;
  std::istringstream lines(text);
  std::string line;
  long long lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::ostringstream where;
    where << origin << ": line " << lineno;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ValidationError(where.str() + ": expected 'label: zero={..}; one={..}'");
    DichotomizationRule rule;
    rule.label = trim(line.substr(0, colon));
    const std::string body = line.substr(colon + 1);
    const auto zero_pos = body.find("zero");
    const auto one_pos = body.find("one");
    if (zero_pos == std::string::npos || one_pos == std::string::npos)
      throw ValidationError(where.str() + ": both zero= and one= sets required");
    rule.zero = parse_code_set(body.substr(zero_pos, one_pos - zero_pos),
                               where.str() + " (zero)");
    rule.one = parse_code_set(body.substr(one_pos), where.str() + " (one)");
    for (int c : rule.zero)
      if (rule.one.count(c))
        throw ValidationError(where.str() + ": code " + std::to_string(c) +
                              " appears in both sets");
    for (const auto& prev : rules)
      if (prev.label == rule.label)
        throw ValidationError(where.str() + ": duplicate rule for item " +
                              rule.label);
    rules.push_back(std::move(rule));
  }
  return rules;
}

RuleSet load_rules(const std::string& path) {
  return parse_rules(read_file(path), path);
}

TableSchema schema_from_rules(const RuleSet& rules, bool allow_missing) {
  TableSchema schema;
  for (const auto& rule : rules) {
    ItemSchema item;
    item.label = rule.label;
    item.valid_codes = rule.zero;
    item.valid_codes.insert(rule.one.begin(), rule.one.end());
    item.allow_missing = allow_missing;
    schema.items.push_back(std::move(item));
  }
  return schema;
}

RuleSet binary_rules(const std::vector<std::string>& labels) {
  RuleSet rules;
  for (const auto& label : labels) rules.push_back({label, {0}, {1}});
  return rules;
}

PatternCounts dichotomize(const RawTable& raw, const RuleSet& rules) {
  const int k = raw.column_count();
  std::vector<const DichotomizationRule*> by_col(k, nullptr);
  for (int j = 0; j < k; ++j) {
    for (const auto& rule : rules)
      if (rule.label == raw.labels[j]) by_col[j] = &rule;
    if (!by_col[j])
      throw ValidationError("dichotomize: no rule for item " + raw.labels[j]);
  }
  std::vector<Pattern> out;
  out.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    Pattern pat(k);
    for (int j = 0; j < k; ++j) {
      const int code = raw.rows[r][j];
      if (code == RawTable::kMissingCode) {
        pat[j] = kMissingResponse;
      } else if (by_col[j]->one.count(code)) {
        pat[j] = 1;
      } else if (by_col[j]->zero.count(code)) {
        pat[j] = 0;
      } else {
        std::ostringstream msg;
        msg << "dichotomize: row " << (r + 2) << ", item " << raw.labels[j]
            << ": code " << code << " not covered by the rule";
        throw ValidationError(msg.str());
      }
    }
    out.push_back(std::move(pat));
  }
  return PatternCounts::from_rows(out);
}

DimensionMapConfig parse_dimension_map_file(const std::string& path) {
  const std::string text = read_file(path);
  DimensionMapConfig config;
  std::istringstream lines(text);
  std::string line;
  long long lineno = 0;
  std::set<std::string> seen;
  while (std::getline(lines, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    std::ostringstream where;
    where << path << ": line " << lineno;
    if (colon == std::string::npos)
      throw ValidationError(where.str() + ": expected 'name: label, label, ...'");
    const std::string name = trim(line.substr(0, colon));
    if (name.empty())
      throw ValidationError(where.str() + ": empty dimension name");
    std::vector<std::string> items;
    for (const auto& tok : split(line.substr(colon + 1), ',')) {
      if (tok.empty())
        throw ValidationError(where.str() + ": empty item label");
      if (!seen.insert(tok).second)
        throw ValidationError(where.str() + ": item " + tok +
                              " assigned to more than one dimension");
      items.push_back(tok);
    }
    if (items.empty())
      throw ValidationError(where.str() + ": dimension " + name + " has no items");
    config.dim_names.push_back(name);
    config.items.push_back(std::move(items));
  }
  if (config.dim_names.empty())
    throw ValidationError(path + ": no dimensions defined");
  return config;
}

DimensionMap resolve_dimension_map(const DimensionMapConfig& config,
                                   const std::vector<std::string>& labels) {
  std::map<std::string, int> col;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (!col.emplace(labels[j], static_cast<int>(j)).second)
      throw ValidationError("duplicate item label in data: " + labels[j]);
  }
  std::vector<int> assignment(labels.size(), -1);
  for (std::size_t d = 0; d < config.items.size(); ++d)
    for (const auto& label : config.items[d]) {
      const auto it = col.find(label);
      if (it == col.end())
        throw ValidationError("dimension map names unknown item: " + label);
      assignment[it->second] = static_cast<int>(d);
    }
  for (std::size_t j = 0; j < labels.size(); ++j)
    if (assignment[j] < 0)
      throw ValidationError("item " + labels[j] + " is not assigned to any dimension");
  return DimensionMap::from_assignment(std::move(assignment),
                                       static_cast<int>(config.items.size()),
                                       labels, config.dim_names);
}

DimensionMap load_dimension_map(const std::string& path) {
  const auto config = parse_dimension_map_file(path);
  std::vector<std::string> labels;
  for (const auto& dim : config.items)
    labels.insert(labels.end(), dim.begin(), dim.end());
  return resolve_dimension_map(config, labels);
}

DimensionMap load_dimension_map(const std::string& path,
                                const std::vector<std::string>& labels) {
  return resolve_dimension_map(parse_dimension_map_file(path), labels);
}

RawTable select_columns(const RawTable& raw,
                        const std::vector<std::string>& labels) {
  std::vector<int> cols;
  for (const auto& label : labels) {
    const auto it = std::find(raw.labels.begin(), raw.labels.end(), label);
    if (it == raw.labels.end())
      throw ValidationError("select_columns: unknown item " + label);
    cols.push_back(static_cast<int>(it - raw.labels.begin()));
  }
  RawTable out;
  out.labels = labels;
  out.rows.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    std::vector<int> sel;
    sel.reserve(cols.size());
    for (int c : cols) sel.push_back(row[c]);
    out.rows.push_back(std::move(sel));
  }
  return out;
}

void write_responses(const std::string& path,
                     const std::vector<std::string>& labels,
                     const std::vector<Pattern>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  for (std::size_t j = 0; j < labels.size(); ++j)
    out << (j ? "," : "") << labels[j];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != labels.size())
      throw ValidationError("write_responses: row length mismatch");
    for (std::size_t j = 0; j < row.size(); ++j) {
      out << (j ? "," : "");
      if (row[j] == kMissingResponse)
        out << "NA";
      else
        out << static_cast<int>(row[j]);
    }
    out << '\n';
  }
}

}  // namespace lcrasch
