#pragma once

// Uniformly sampled scalar series plus the drawdown segmentation and
// analysis-window construction used to locate critical events.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lpplvv {

class TimeSeries {
 public:
  // Throws invalid_input unless dt > 0 and at least two samples are given.
  TimeSeries(double t0, double dt, std::vector<double> values);

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return values_.size(); }
  double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  double t0_;
  double dt_;
  std::vector<double> values_;
};

struct DrawdownEvent {
  std::size_t peak_index = 0;
  double peak_value = 0.0;
  std::size_t trough_index = 0;
  double trough_value = 0.0;
  std::optional<std::size_t> end_index;  // first strict exceedance of the peak
  double magnitude = 0.0;                // (peak - trough) / peak
};

enum class WindowClass { half, third, quarter, subsample };

std::string to_string(WindowClass c);
WindowClass window_class_from_string(const std::string& s);
double window_fraction(WindowClass c);  // 1/2, 1/3, 1/4

// Inclusive index range [start_index, end_index] into a parent series.
struct WindowSpec {
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  WindowClass label = WindowClass::half;
  int subsample_id = -1;

  std::size_t length() const noexcept { return end_index - start_index; }
  std::size_t sample_count() const noexcept { return end_index - start_index + 1; }
};

struct CriticalEvent {
  double tc = 0.0;
  double peak_value = 0.0;
  std::size_t index = 0;
};

std::vector<DrawdownEvent> segment_drawdowns(const TimeSeries& ts, double threshold);

CriticalEvent critical_event(const TimeSeries& ts, double threshold);
CriticalEvent critical_event(const TimeSeries& ts, const std::vector<DrawdownEvent>& events);

WindowSpec analysis_window(const TimeSeries& ts, const std::vector<DrawdownEvent>& events,
                           WindowClass fraction, std::size_t min_samples = 50);

std::vector<WindowSpec> subsample_windows(const WindowSpec& w, std::size_t count,
                                          std::size_t min_len);

// Two-column CSV with a `time,value` header; values written with 17
// significant digits so they round-trip exactly.
void write_csv(const TimeSeries& ts, const std::string& path,
               const std::string& value_column = "value");
TimeSeries read_csv(const std::string& path);

}  // namespace lpplvv
