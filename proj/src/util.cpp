#include "qbxfds/util.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace qbxfds {

int thread_count() {
  if (const char* env = std::getenv("QBXFDS_NUM_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {
thread_local bool inside_parallel_worker = false;
}

void parallel_for(long n, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  int nt = thread_count();
  // nested calls run inline on the owning worker
  if (nt == 1 || n == 1 || inside_parallel_worker) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  nt = static_cast<int>(std::min<long>(nt, n));
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      inside_parallel_worker = true;
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= n || failed.load(std::memory_order_relaxed)) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& metadata,
                     const std::vector<std::string>& columns) {
  auto* f = new std::ofstream(path);
  if (!f->good()) {
    delete f;
    throw std::runtime_error("cannot open output file: " + path);
  }
  stream_ = f;
  for (const auto& m : metadata) (*f) << "# " << m << "\n";
  for (size_t i = 0; i < columns.size(); ++i)
    (*f) << columns[i] << (i + 1 == columns.size() ? "\n" : ",");
}

CsvWriter::~CsvWriter() { delete static_cast<std::ofstream*>(stream_); }

void CsvWriter::row(const std::vector<double>& values) {
  auto& f = *static_cast<std::ofstream*>(stream_);
  for (size_t i = 0; i < values.size(); ++i)
    f << format_double(values[i]) << (i + 1 == values.size() ? "\n" : ",");
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
  auto& f = *static_cast<std::ofstream*>(stream_);
  for (size_t i = 0; i < cells.size(); ++i)
    f << cells[i] << (i + 1 == cells.size() ? "\n" : ",");
}

}  // namespace qbxfds
