#include "lpplvv/timeseries.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lpplvv/error.hpp"

namespace lpplvv {

TimeSeries::TimeSeries(double t0, double dt, std::vector<double> values)
    : t0_(t0), dt_(dt), values_(std::move(values)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw Error(ErrorKind::invalid_input, "time series spacing must be positive");
  }
  if (values_.size() < 2) {
    throw Error(ErrorKind::invalid_input, "time series needs at least 2 samples");
  }
}

std::string to_string(WindowClass c) {
  switch (c) {
    case WindowClass::half: return "half";
    case WindowClass::third: return "third";
    case WindowClass::quarter: return "quarter";
    case WindowClass::subsample: return "subsample";
  }
  return "unknown";
}

WindowClass window_class_from_string(const std::string& s) {
  if (s == "half") return WindowClass::half;
  if (s == "third") return WindowClass::third;
  if (s == "quarter") return WindowClass::quarter;
  if (s == "subsample") return WindowClass::subsample;
  throw Error(ErrorKind::invalid_input, "unknown window class '" + s + "'");
}

double window_fraction(WindowClass c) {
  switch (c) {
    case WindowClass::half: return 1.0 / 2.0;
    case WindowClass::third: return 1.0 / 3.0;
    case WindowClass::quarter: return 1.0 / 4.0;
    case WindowClass::subsample: break;
  }
  throw Error(ErrorKind::invalid_input, "subsample windows have no crossing fraction");
}

std::vector<DrawdownEvent> segment_drawdowns(const TimeSeries& ts, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::invalid_input, "drawdown threshold must lie in (0,1)");
  }
  const auto& v = ts.values();
  std::vector<DrawdownEvent> events;
  std::size_t peak = 0;
  bool open = false;
  DrawdownEvent current;

  auto check_peak = [&](std::size_t i) {
    if (!(v[i] > 0.0)) {
      throw Error(ErrorKind::degenerate_data,
                  "nonpositive running peak at index " + std::to_string(i));
    }
  };
  check_peak(0);

  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!open) {
      if (v[i] > v[peak]) {
        peak = i;
      } else if (v[i] <= (1.0 - threshold) * v[peak]) {
        open = true;
        current = DrawdownEvent{};
        current.peak_index = peak;
        current.peak_value = v[peak];
        current.trough_index = i;
        current.trough_value = v[i];
      }
    } else {
      if (v[i] < current.trough_value) {
        current.trough_index = i;
        current.trough_value = v[i];
      }
      if (v[i] > current.peak_value) {
        current.end_index = i;
        current.magnitude = (current.peak_value - current.trough_value) / current.peak_value;
        events.push_back(current);
        open = false;
        peak = i;
      }
    }
  }
  if (open) {
    current.magnitude = (current.peak_value - current.trough_value) / current.peak_value;
    events.push_back(current);
  }
  return events;
}

CriticalEvent critical_event(const TimeSeries& ts, const std::vector<DrawdownEvent>& events) {
  if (events.size() < 2) {
    throw Error(ErrorKind::not_enough_events,
                "need at least 2 drawdowns, found " + std::to_string(events.size()));
  }
  const auto& last = events.back();
  return CriticalEvent{ts.time(last.peak_index), last.peak_value, last.peak_index};
}

CriticalEvent critical_event(const TimeSeries& ts, double threshold) {
  return critical_event(ts, segment_drawdowns(ts, threshold));
}

WindowSpec analysis_window(const TimeSeries& ts, const std::vector<DrawdownEvent>& events,
                           WindowClass fraction, std::size_t min_samples) {
  if (events.size() < 2) {
    throw Error(ErrorKind::not_enough_events,
                "need at least 2 drawdowns, found " + std::to_string(events.size()));
  }
  const auto& prior = events[events.size() - 2];
  const auto& last = events.back();
  if (!(last.peak_value > 0.0)) {
    throw Error(ErrorKind::degenerate_data, "critical peak must be positive");
  }
  // Only the final event can be unrecovered.
  const std::size_t start = *prior.end_index;
  const double level = window_fraction(fraction) * last.peak_value;

  std::size_t end = start;
  while (end < last.peak_index && ts[end] < level) ++end;
  if (end >= last.peak_index) {
    throw Error(ErrorKind::no_window, "series never reaches " + to_string(fraction) +
                                          " of the peak before the critical event");
  }
  WindowSpec w{start, end, fraction, -1};
  if (end <= start || w.sample_count() < min_samples) {
    throw Error(ErrorKind::too_short, to_string(fraction) + " window has " +
                                          std::to_string(w.sample_count()) + " samples, need " +
                                          std::to_string(min_samples));
  }
  return w;
}

std::vector<WindowSpec> subsample_windows(const WindowSpec& w, std::size_t count,
                                          std::size_t min_len) {
  if (count < 1) throw Error(ErrorKind::invalid_input, "subsample count must be >= 1");
  if (count == 1) return {w};
  if (min_len > w.length() || w.length() - min_len < count - 1) {
    throw Error(ErrorKind::too_short, "cannot place " + std::to_string(count) +
                                          " subsamples of length >= " + std::to_string(min_len) +
                                          " in a window of length " +
                                          std::to_string(w.length()));
  }
  const std::size_t span = w.length() - min_len;
  std::vector<WindowSpec> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    // Integer rounding of k*span/(count-1); span >= count-1 keeps starts distinct.
    const std::size_t offset = (2 * k * span + (count - 1)) / (2 * (count - 1));
    out.push_back(WindowSpec{w.start_index + offset, w.end_index, WindowClass::subsample,
                             static_cast<int>(k)});
  }
  return out;
}

void write_csv(const TimeSeries& ts, const std::string& path, const std::string& value_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << "time," << value_column << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", ts.time(i), ts[i]);
    out << buf;
  }
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

TimeSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::invalid_input, "'" + path + "' is empty");
  std::vector<double> times;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::invalid_input,
                  path + ":" + std::to_string(lineno) + ": expected two columns");
    }
    try {
      times.push_back(std::stod(line.substr(0, comma)));
      values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::invalid_input,
                  path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  if (times.size() < 2) {
    throw Error(ErrorKind::invalid_input, "'" + path + "' holds fewer than 2 samples");
  }
  const double dt = times[1] - times[0];
  for (std::size_t i = 2; i < times.size(); ++i) {
    const double expected = times[0] + static_cast<double>(i) * dt;
    if (std::abs(times[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw Error(ErrorKind::invalid_input,
                  "'" + path + "' is not uniformly sampled near row " + std::to_string(i + 2));
    }
  }
  return TimeSeries(times[0], dt, std::move(values));
}

}  // namespace lpplvv
