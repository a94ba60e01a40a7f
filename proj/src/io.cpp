#include "filament/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace filament {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) {
    throw std::runtime_error("non-numeric cell at row " + std::to_string(row) + ", column " +
                             std::to_string(col + 1) + ": '" + cell + "'");
  }
  return value;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  return out;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const CsvColumns& columns, bool rescale,
                   bool header) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t row = 0;
  int ix1 = 0, ix2 = 1, iy = 2;
  if (header) {
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    ++row;
    auto names = split_csv_line(line);
    ix1 = ix2 = iy = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == columns.x1) ix1 = static_cast<int>(i);
      if (names[i] == columns.x2) ix2 = static_cast<int>(i);
      if (names[i] == columns.y) iy = static_cast<int>(i);
    }
    if (ix1 < 0) throw std::runtime_error("missing column '" + columns.x1 + "' in " + path);
    if (ix2 < 0) throw std::runtime_error("missing column '" + columns.x2 + "' in " + path);
    if (iy < 0) throw std::runtime_error("missing column '" + columns.y + "' in " + path);
  }
  std::vector<Eigen::Vector2d> xs;
  std::vector<double> ys;
  int needed = std::max(ix1, std::max(ix2, iy));
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) <= needed) {
      throw std::runtime_error("row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " columns, need " +
                               std::to_string(needed + 1));
    }
    xs.emplace_back(parse_cell(cells[ix1], row, ix1), parse_cell(cells[ix2], row, ix2));
    ys.push_back(parse_cell(cells[iy], row, iy));
  }
  if (xs.empty()) throw std::runtime_error("no data rows in " + path);

  Dataset data;
  data.ys = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  if (rescale) {
    PlaneTransform tf;
    for (int axis = 0; axis < 2; ++axis) {
      double lo = xs[0][axis], hi = xs[0][axis];
      for (const auto& x : xs) {
        lo = std::min(lo, x[axis]);
        hi = std::max(hi, x[axis]);
      }
      if (!(hi > lo)) {
        throw std::runtime_error("coordinate " + std::to_string(axis + 1) +
                                 " has degenerate extent; cannot rescale");
      }
      tf[axis] = AxisTransform{lo, hi};
    }
    data.xs.reserve(xs.size());
    for (const auto& x : xs) {
      data.xs.emplace_back(tf[0].to_unit(x[0]), tf[1].to_unit(x[1]));
    }
    data.transform = tf;
  } else {
    data.xs = std::move(xs);
  }
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out = open_output(path);
  out << "x1,x2,y\n";
  for (Eigen::Index i = 0; i < data.ys.size(); ++i) {
    out << format_double(data.xs[i][0]) << ',' << format_double(data.xs[i][1]) << ','
        << format_double(data.ys[i]) << '\n';
  }
}

Dataset read_dataset_csv(const std::string& path) {
  return ingest_csv(path, CsvColumns{}, /*rescale=*/false, /*header=*/true);
}

void write_filament_csv(const std::string& path, const Filament& filament,
                        const std::optional<PlaneTransform>& transform) {
  std::ofstream out = open_output(path);
  out << "x1,x2,lambda,status\n";
  for (std::size_t i = 0; i < filament.size(); ++i) {
    Eigen::Vector2d p = filament.points[i];
    if (transform) {
      p = {(*transform)[0].from_unit(p[0]), (*transform)[1].from_unit(p[1])};
    }
    out << format_double(p[0]) << ',' << format_double(p[1]) << ','
        << format_double(filament.lambda[i]) << ',' << to_string(filament.status[i]) << '\n';
  }
}

Filament read_filament_csv(const std::string& path,
                           const std::optional<PlaneTransform>& transform) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty filament file: " + path);
  Filament fil;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() < 4) {
      throw std::runtime_error("filament row " + std::to_string(row) + " needs 4 columns");
    }
    Eigen::Vector2d p(parse_cell(cells[0], row, 0), parse_cell(cells[1], row, 1));
    if (transform) {
      p = {(*transform)[0].to_unit(p[0]), (*transform)[1].to_unit(p[1])};
    }
    fil.points.push_back(p);
    fil.lambda.push_back(parse_cell(cells[2], row, 2));
    fil.status.push_back(point_status_from_string(cells[3]));
    fil.clause.push_back(StopClause::none);
    fil.iterations.push_back(0);
  }
  return fil;
}

namespace {

json knots_to_json(const KnotVector& kv) {
  json j;
  j["order"] = kv.order();
  std::vector<double> interior(kv.knots().begin() + kv.order(),
                               kv.knots().end() - kv.order());
  j["interior"] = interior;
  return j;
}

KnotVector knots_from_json(const json& j) {
  return KnotVector(j.at("order").get<int>(), j.at("interior").get<std::vector<double>>());
}

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void write_model_json(const std::string& path, const FittedPosterior& post,
                      const std::optional<PlaneTransform>& transform) {
  json j;
  j["basis"] = {{"axis1", knots_to_json(post.spec().axis(0))},
                {"axis2", knots_to_json(post.spec().axis(1))}};
  j["prior"] = {{"theta0", vector_to_json(post.prior().theta0)},
                {"lambda0_diag", vector_to_json(post.prior().lambda0_diag)}};
  j["mean_theta"] = vector_to_json(post.mean_theta());
  const Eigen::MatrixXd& chol = post.precision_chol();
  std::vector<double> lower;
  lower.reserve(static_cast<std::size_t>(chol.rows()) * (chol.rows() + 1) / 2);
  for (Eigen::Index r = 0; r < chol.rows(); ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) lower.push_back(chol(r, c));
  }
  j["precision_chol_lower"] = lower;
  j["sigma2_hat"] = post.sigma2_hat();
  j["n"] = post.n();
  if (transform) {
    j["transform"] = {{"x1", {{"lo", (*transform)[0].lo}, {"hi", (*transform)[0].hi}}},
                      {"x2", {{"lo", (*transform)[1].lo}, {"hi", (*transform)[1].hi}}}};
  }
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

ModelFile read_model_json(const std::string& path) {
  std::ifstream in = open_input(path);
  json j = json::parse(in);
  BasisSpec spec(knots_from_json(j.at("basis").at("axis1")),
                 knots_from_json(j.at("basis").at("axis2")));
  PriorSpec prior;
  prior.theta0 = vector_from_json(j.at("prior").at("theta0"));
  prior.lambda0_diag = vector_from_json(j.at("prior").at("lambda0_diag"));
  LinearFit fit;
  fit.mean = vector_from_json(j.at("mean_theta"));
  auto lower = j.at("precision_chol_lower").get<std::vector<double>>();
  Eigen::Index p = fit.mean.size();
  if (static_cast<Eigen::Index>(lower.size()) != p * (p + 1) / 2) {
    throw std::runtime_error("model file Cholesky factor has wrong size");
  }
  fit.chol = Eigen::MatrixXd::Zero(p, p);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c <= r; ++c) fit.chol(r, c) = lower[idx++];
  }
  fit.sigma2_hat = j.at("sigma2_hat").get<double>();
  fit.log_det_precision = 2.0 * fit.chol.diagonal().array().log().sum();
  int n = j.at("n").get<int>();
  std::optional<PlaneTransform> transform;
  if (j.contains("transform")) {
    PlaneTransform tf;
    tf[0] = {j["transform"]["x1"]["lo"].get<double>(), j["transform"]["x1"]["hi"].get<double>()};
    tf[1] = {j["transform"]["x2"]["lo"].get<double>(), j["transform"]["x2"]["hi"].get<double>()};
    transform = tf;
  }
  return ModelFile{FittedPosterior(std::move(spec), std::move(prior), std::move(fit), n),
                   transform};
}

}  // namespace filament
