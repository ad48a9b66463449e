#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rdream/simulation.hpp"

namespace rdream {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* contamination_kind_name(ContaminationSpec::Kind k) {
  switch (k) {
    case ContaminationSpec::Kind::None: return "none";
    case ContaminationSpec::Kind::AddConstant: return "add_constant";
    case ContaminationSpec::Kind::ReplaceByModel: return "replace_by_model";
  }
  return "none";
}

ContaminationSpec::Kind parse_contamination_kind(const std::string& s) {
  if (s == "none") return ContaminationSpec::Kind::None;
  if (s == "add_constant") return ContaminationSpec::Kind::AddConstant;
  if (s == "replace_by_model") return ContaminationSpec::Kind::ReplaceByModel;
  throw Error("unknown contamination kind: " + s);
}

const char* replacement_name(ReplacementModel m) {
  return m == ReplacementModel::CosineRidge ? "cosine_ridge" : "exp_valley";
}

ReplacementModel parse_replacement(const std::string& s) {
  if (s == "cosine_ridge") return ReplacementModel::CosineRidge;
  if (s == "exp_valley") return ReplacementModel::ExpValley;
  throw Error("unknown replacement model: " + s);
}

TestMethod parse_method(const std::string& s) {
  if (s == "opg") return TestMethod::Opg;
  if (s == "dee") return TestMethod::Dee;
  if (s == "wq") return TestMethod::Wq;
  if (s == "gwz") return TestMethod::Gwz;
  throw Error("unknown test method: " + s);
}

// Documented column layout; the leading eight columns follow the
// table-shaped report order, the remainder make the file self-contained.
const char* kCsvHeader =
    "family,error,a,n,method,rate,reps,seed_base,"
    "p,contamination,contamination_value,replacement_model,"
    "contamination_rate,lognormal_sigma2,alpha,failures,invalid";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error("malformed number in report: " + s);
  return v;
}

}  // namespace

void emit_report(const PowerTable& table, ReportFormat format,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open report file for writing: " + path);

  if (format == ReportFormat::Csv) {
    out << "# alpha=" << format_double(table.alpha) << " reps=" << table.reps
        << " seed_base=" << table.seed_base << "\n";
    out << kCsvHeader << "\n";
    for (const PowerCell& cell : table.cells) {
      const ScenarioSpec& s = cell.scenario;
      out << family_name(s.family) << ',' << error_name(s.error) << ','
          << format_double(s.a) << ',' << s.n << ','
          << to_string(cell.method) << ','
          << format_double(cell.rejection_rate) << ',' << cell.reps << ','
          << table.seed_base << ',' << s.dimension() << ','
          << contamination_kind_name(s.contamination.kind) << ','
          << format_double(s.contamination.value) << ','
          << replacement_name(s.contamination.model) << ','
          << format_double(s.contamination.rate) << ','
          << format_double(s.lognormal_sigma2) << ','
          << format_double(table.alpha) << ',' << cell.failures << ','
          << (cell.invalid ? 1 : 0) << "\n";
    }
  } else {
    nlohmann::ordered_json j;
    j["alpha"] = table.alpha;
    j["reps"] = table.reps;
    j["seed_base"] = table.seed_base;
    j["cells"] = nlohmann::ordered_json::array();
    for (const PowerCell& cell : table.cells) {
      const ScenarioSpec& s = cell.scenario;
      nlohmann::ordered_json row;
      row["family"] = family_name(s.family);
      row["error"] = error_name(s.error);
      row["a"] = s.a;
      row["n"] = s.n;
      row["method"] = to_string(cell.method);
      row["rate"] = cell.rejection_rate;
      row["reps"] = cell.reps;
      row["seed_base"] = table.seed_base;
      row["p"] = s.dimension();
      row["contamination"] = contamination_kind_name(s.contamination.kind);
      row["contamination_value"] = s.contamination.value;
      row["replacement_model"] = replacement_name(s.contamination.model);
      row["contamination_rate"] = s.contamination.rate;
      row["lognormal_sigma2"] = s.lognormal_sigma2;
      row["alpha"] = table.alpha;
      row["failures"] = cell.failures;
      row["invalid"] = cell.invalid;
      j["cells"].push_back(std::move(row));
    }
    out << j.dump(2) << "\n";
  }
  if (!out) throw Error("failed while writing report file: " + path);
}

namespace {

PowerCell cell_from_fields(const std::string& family, const std::string& error,
                           double a, Index n, const std::string& method,
                           double rate, int reps, int p,
                           const std::string& contamination, double cvalue,
                           const std::string& replacement, double crate,
                           double lognormal_sigma2, int failures,
                           bool invalid) {
  PowerCell cell;
  cell.scenario.family = parse_family(family);
  cell.scenario.error = parse_error(error);
  cell.scenario.a = a;
  cell.scenario.n = n;
  cell.scenario.p = p;
  cell.scenario.contamination.kind = parse_contamination_kind(contamination);
  cell.scenario.contamination.value = cvalue;
  cell.scenario.contamination.model = parse_replacement(replacement);
  cell.scenario.contamination.rate = crate;
  cell.scenario.lognormal_sigma2 = lognormal_sigma2;
  cell.method = parse_method(method);
  cell.rejection_rate = rate;
  cell.reps = reps;
  cell.failures = failures;
  cell.invalid = invalid;
  return cell;
}

}  // namespace

PowerTable parse_report(const std::string& path, ReportFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open report file: " + path);
  PowerTable table;

  if (format == ReportFormat::Csv) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# alpha=", 0) != 0) {
      throw Error("missing report preamble in " + path);
    }
    {
      std::istringstream meta(line.substr(2));
      std::string tok;
      while (meta >> tok) {
        const auto eq = tok.find('=');
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "alpha") table.alpha = parse_double(val);
        if (key == "reps") table.reps = std::stoi(val);
        if (key == "seed_base") table.seed_base = std::stoull(val);
      }
    }
    if (!std::getline(in, line)) throw Error("missing header row in " + path);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 17) throw Error("malformed report row: " + line);
      table.cells.push_back(cell_from_fields(
          f[0], f[1], parse_double(f[2]), std::stoll(f[3]), f[4],
          parse_double(f[5]), std::stoi(f[6]), std::stoi(f[8]), f[9],
          parse_double(f[10]), f[11], parse_double(f[12]), parse_double(f[13]),
          std::stoi(f[15]), f[16] == "1"));
    }
  } else {
    nlohmann::json j;
    in >> j;
    table.alpha = j.at("alpha").get<double>();
    table.reps = j.at("reps").get<int>();
    table.seed_base = j.at("seed_base").get<std::uint64_t>();
    for (const auto& row : j.at("cells")) {
      table.cells.push_back(cell_from_fields(
          row.at("family").get<std::string>(),
          row.at("error").get<std::string>(), row.at("a").get<double>(),
          row.at("n").get<Index>(), row.at("method").get<std::string>(),
          row.at("rate").get<double>(), row.at("reps").get<int>(),
          row.at("p").get<int>(),
          row.at("contamination").get<std::string>(),
          row.at("contamination_value").get<double>(),
          row.at("replacement_model").get<std::string>(),
          row.at("contamination_rate").get<double>(),
          row.at("lognormal_sigma2").get<double>(),
          row.at("failures").get<int>(), row.at("invalid").get<bool>()));
    }
  }
  return table;
}

}  // namespace rdream
