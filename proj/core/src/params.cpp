#include "hsac/params.hpp"

#include <cmath>

#include "hsac/errors.hpp"

namespace hsac {

namespace {
std::int64_t shape_count(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}
}  // namespace

ParameterSet::Entry& ParameterSet::add(const std::string& name,
                                       std::vector<int> shape) {
  const auto n = shape_count(shape);
  return add(name, std::move(shape), Eigen::VectorXd::Zero(n));
}

ParameterSet::Entry& ParameterSet::add(const std::string& name,
                                       std::vector<int> shape,
                                       Eigen::VectorXd data) {
  if (index_.count(name))
    throw ConfigError("duplicate parameter name: " + name);
  if (shape.empty() || shape.size() > 2)
    throw ConfigError("parameter shape must be 1-d or 2-d: " + name);
  for (int d : shape)
    if (d < 1) throw ConfigError("parameter dimension < 1: " + name);
  if (shape_count(shape) != data.size())
    throw ConfigError("parameter data does not match shape: " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back(Entry{name, std::move(shape), std::move(data)});
  return entries_.back();
}

bool ParameterSet::contains(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

ParameterSet::Entry& ParameterSet::entry(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    throw ConfigError("unknown parameter: " + std::string(name));
  return entries_[it->second];
}

const ParameterSet::Entry& ParameterSet::entry(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end())
    throw ConfigError("unknown parameter: " + std::string(name));
  return entries_[it->second];
}

Eigen::VectorXd& ParameterSet::data(std::string_view name) {
  return entry(name).data;
}

const Eigen::VectorXd& ParameterSet::data(std::string_view name) const {
  return entry(name).data;
}

int ParameterSet::rows(const Entry& e) {
  return e.shape.size() == 2 ? e.shape[0] : 1;
}

int ParameterSet::cols(const Entry& e) {
  return e.shape.size() == 2 ? e.shape[1] : e.shape[0];
}

Eigen::MatrixXd ParameterSet::matrix(std::string_view name) const {
  const Entry& e = entry(name);
  const int r = rows(e), c = cols(e);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = e.data(i * c + j);
  return m;
}

void ParameterSet::set_matrix(std::string_view name, const Eigen::MatrixXd& m) {
  Entry& e = entry(name);
  const int r = rows(e), c = cols(e);
  if (m.rows() != r || m.cols() != c)
    throw ConfigError("matrix shape mismatch for " + e.name);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) e.data(i * c + j) = m(i, j);
}

std::int64_t ParameterSet::scalar_count() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) n += e.data.size();
  return n;
}

std::vector<std::string> ParameterSet::names_with_prefix(
    std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.name.rfind(prefix, 0) == 0) out.push_back(e.name);
  return out;
}

bool ParameterSet::all_finite() const {
  for (const auto& e : entries_)
    if (!e.data.allFinite()) return false;
  return true;
}

ParameterSet ParameterSet::zeros_like(const ParameterSet& other) {
  ParameterSet out;
  for (const auto& e : other.entries())
    out.add(e.name, e.shape);
  return out;
}

}  // namespace hsac
