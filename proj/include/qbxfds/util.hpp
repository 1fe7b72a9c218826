#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbxfds {

// Error taxonomy. Everything derives from std::runtime_error so callers can
// catch broadly; the distinct types exist for callers that want to react
// (e.g. refine the geometry on a CollisionError).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SingularEvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// QBX expansion ball contains a source point, or a proxy ball fails to
// contain its cluster. The fix is to refine the discretization or shrink
// the QBX radius scale.
struct CollisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularBlockError : std::runtime_error {
  SingularBlockError(const std::string& what, long block)
      : std::runtime_error(what), block_id(block) {}
  long block_id;
};

using IndexList = std::vector<long>;

// Runs fn(i) for i in [0, n). Thread count from QBXFDS_NUM_THREADS, else
// hardware concurrency. fn must write only to slot i of any shared output.
void parallel_for(long n, const std::function<void(long)>& fn);

int thread_count();

// Minimal CSV emitter: '#'-prefixed metadata header lines, then one header
// row and data rows. Numeric cells are written with max_digits10.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& metadata,
            const std::vector<std::string>& columns);
  ~CsvWriter();
  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& cells);

 private:
  void* stream_;
};

std::string format_double(double v);

}  // namespace qbxfds
