#include "tables.hpp"

#include "error.hpp"
#include "json_io.hpp"

namespace cavitylb {

PolicyParams TableRow::params() const {
  switch (policy) {
    case Policy::Push:
      return PushParams{lambda, rate};
    case Policy::Waterfill:
      return WaterfillParams{lambda, rate};
    case Policy::Pull:
      return PullParams::from_overall(lambda, rate, 0.0);
    case Policy::Pooling:
      return PoolingParams{lambda, rate};
  }
  throw DomainError("table row: unknown policy");
}

namespace {

struct Published {
  double sim, conf, rel;
};

struct Setting {
  std::string ph;
  double lambda;
  double rate;
  double limit;
  Published rows[4];
  double C = 0.0;
};

std::vector<TableRow> expand(int table, Policy policy, const std::vector<Setting>& settings) {
  static constexpr int kN[4] = {100, 1000, 10000, 100000};
  std::vector<TableRow> out;
  for (int s = 0; s < static_cast<int>(settings.size()); ++s) {
    const Setting& st = settings[s];
    for (int i = 0; i < 4; ++i) {
      TableRow r;
      r.table = table;
      r.policy = policy;
      r.setting = s;
      r.ph_spec = st.ph;
      r.ph = parse_ph_spec(st.ph);
      r.lambda = st.lambda;
      r.rate = st.rate;
      r.C = st.C;
      r.N = kN[i];
      r.sim = st.rows[i].sim;
      r.conf = st.rows[i].conf;
      r.limit = st.limit;
      r.rel_err_pct = st.rows[i].rel;
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

std::vector<TableRow> table_rows(int n) {
  switch (n) {
    case 1:
      return expand(1, Policy::Push,
                    {
                        {"exponential", 0.9, 0.3, 6.0081,
                         {{5.8698, 2.11e-02, 2.3028}, {6.0373, 6.70e-03, 0.4862},
                          {6.0098, 1.39e-03, 0.0288}, {6.0084, 6.30e-04, 0.0047}}},
                        {"hyperexp:15,0.5", 0.85, 0.5, 4.5862,
                         {{4.7074, 4.67e-02, 2.6416}, {4.6229, 9.23e-03, 0.7996},
                          {4.5877, 2.65e-03, 0.0314}, {4.5867, 6.53e-04, 0.0106}}},
                        {"erlang:6", 0.8, 0.25, 4.2206,
                         {{4.0865, 1.02e-02, 3.1766}, {4.2557, 6.43e-03, 0.8316},
                          {4.2258, 1.71e-03, 0.1251}, {4.2210, 4.53e-04, 0.0106}}},
                        {"hypererlang:2,5,0.25", 0.85, 0.15, 8.7304,
                         {{7.9505, 1.77e-02, 8.9331}, {8.4868, 7.58e-03, 2.7905},
                          {8.6962, 1.06e-03, 0.3923}, {8.7266, 2.36e-04, 0.0431}}},
                    });
    case 2:
      return expand(2, Policy::Waterfill,
                    {
                        {"exponential", 0.8, 0.4, 3.5136,
                         {{3.8973, 4.43e-02, 10.9205}, {3.5840, 1.49e-02, 2.0040},
                          {3.5446, 3.95e-03, 0.8812}, {3.5315, 1.68e-03, 0.5093}},
                         20},
                        {"hyperexp:10,0.5", 0.8, 0.4, 4.5947,
                         {{5.5115, 1.09e-01, 19.9529}, {4.7841, 3.52e-02, 4.1217},
                          {4.6580, 9.20e-03, 1.3775}, {4.6239, 2.61e-03, 0.6346}},
                         40},
                        {"erlang:3", 0.75, 1.2, 1.4968,
                         {{1.4877, 1.43e-02, 0.6059}, {1.5511, 6.14e-03, 3.6306},
                          {1.4975, 2.52e-03, 0.0502}, {1.4963, 9.06e-04, 0.0298}},
                         30},
                        {"hypererlang:3,5,0.6", 0.8, 1.2, 1.5708,
                         {{1.6386, 1.53e-02, 4.3178}, {1.6993, 8.02e-03, 8.1847},
                          {1.5986, 2.74e-03, 1.7696}, {1.5756, 8.06e-04, 0.3098}},
                         30},
                    });
    case 3:
      return expand(3, Policy::Pull,
                    {
                        {"exponential", 0.7, 0.2, 2.0816,
                         {{2.0198, 3.70e-03, 2.9688}, {2.0707, 1.28e-03, 0.5237},
                          {2.0803, 3.78e-04, 0.0654}, {2.0815, 9.90e-05, 0.0037}}},
                        {"hyperexp:20,0.5", 0.9, 0.4, 1.8726,
                         {{2.5316, 4.76e-02, 35.1893}, {1.8590, 8.45e-03, 0.7271},
                          {1.8540, 3.07e-03, 0.9965}, {1.8711, 7.10e-04, 0.0836}}},
                        {"erlang:3", 0.75, 0.15, 3.0000,
                         {{2.6126, 6.58e-03, 12.9117}, {2.7894, 2.75e-03, 7.0205},
                          {2.8719, 3.54e-03, 4.2689}, {2.9198, 4.00e-03, 2.6733}}},
                        {"hypererlang:2,5,0.75", 0.75, 0.5, 1.1839,
                         {{1.2417, 1.99e-03, 4.8781}, {1.1888, 4.91e-04, 0.4126},
                          {1.1845, 1.54e-04, 0.0536}, {1.1839, 6.97e-05, 0.0038}}},
                    });
    case 4:
      return expand(4, Policy::Pooling,
                    {
                        {"exponential", 0.8, 0.3, 1.3958,
                         {{1.4774, 5.42e-03, 5.8454}, {1.4153, 1.27e-03, 1.4007},
                          {1.3976, 5.90e-04, 0.1325}, {1.3958, 2.35e-04, 0.0046}}},
                        {"hyperexp:5,0.5", 0.7, 0.3, 1.0699,
                         {{1.0469, 7.06e-03, 2.1500}, {1.0726, 1.59e-03, 0.2493},
                          {1.0702, 4.63e-04, 0.0252}, {1.0700, 1.91e-04, 0.0094}}},
                        {"erlang:7", 0.9, 0.5, 1.2588,
                         {{1.2995, 4.94e-03, 3.2315}, {1.2607, 1.33e-03, 0.1566},
                          {1.2589, 4.05e-04, 0.0112}, {1.2587, 1.01e-04, 0.0035}}},
                        {"hypererlang:3,5,0.6", 0.8, 0.1, 2.0320,
                         {{2.0725, 4.47e-03, 1.9956}, {2.0351, 1.66e-03, 0.1544},
                          {2.0322, 3.88e-04, 0.0134}, {2.0321, 1.51e-04, 0.0054}}},
                    });
    default:
      throw DomainError("table: n must be 1, 2, 3 or 4");
  }
}

}  // namespace cavitylb
