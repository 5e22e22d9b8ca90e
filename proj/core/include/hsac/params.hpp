#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace hsac {

// Named flat arrays of trainable 64-bit scalars. Entry order is insertion
// order and defines the checkpoint layout. Shapes are one- or two-dimensional;
// two-dimensional entries use row-major element order in the flat array.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    std::vector<int> shape;
    Eigen::VectorXd data;
  };

  // Zero-initialized entry. Throws ConfigError on duplicate name or bad shape.
  Entry& add(const std::string& name, std::vector<int> shape);
  Entry& add(const std::string& name, std::vector<int> shape,
             Eigen::VectorXd data);

  bool contains(std::string_view name) const;
  Entry& entry(std::string_view name);
  const Entry& entry(std::string_view name) const;
  Eigen::VectorXd& data(std::string_view name);
  const Eigen::VectorXd& data(std::string_view name) const;

  // Row/col extents of an entry: {n} maps to 1 x n, {r, c} to r x c.
  static int rows(const Entry& e);
  static int cols(const Entry& e);

  // Row-major copy in/out of matrix form.
  Eigen::MatrixXd matrix(std::string_view name) const;
  void set_matrix(std::string_view name, const Eigen::MatrixXd& m);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::int64_t scalar_count() const;

  std::vector<std::string> names_with_prefix(std::string_view prefix) const;

  bool all_finite() const;

  // Same names and shapes, all values zero.
  static ParameterSet zeros_like(const ParameterSet& other);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace hsac
