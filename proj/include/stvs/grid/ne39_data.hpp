#pragma once

// Generated by scripts/make_ne39.py; identical to data/ne39.json.

namespace stvs::grid {

inline constexpr const char* kNe39Json = R"json({
 "name": "ne39",
 "base_mva": 100.0,
 "buses": [
  {
   "id": 1,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 2,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 3,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 4,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 5,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 6,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 7,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 8,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 9,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 10,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 11,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 12,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 13,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 14,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 15,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 16,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 17,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 18,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 19,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 20,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 21,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 22,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 23,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 24,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 25,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 26,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 27,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 28,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 29,
   "kind": "load",
   "v_base": 1.0
  },
  {
   "id": 30,
   "kind": "generator",
   "v_base": 1.0499
  },
  {
   "id": 31,
   "kind": "generator",
   "v_base": 0.982
  },
  {
   "id": 32,
   "kind": "generator",
   "v_base": 0.9841
  },
  {
   "id": 33,
   "kind": "generator",
   "v_base": 0.9972
  },
  {
   "id": 34,
   "kind": "generator",
   "v_base": 1.0123
  },
  {
   "id": 35,
   "kind": "generator",
   "v_base": 1.0494
  },
  {
   "id": 36,
   "kind": "generator",
   "v_base": 1.0636
  },
  {
   "id": 37,
   "kind": "generator",
   "v_base": 1.0275
  },
  {
   "id": 38,
   "kind": "generator",
   "v_base": 1.0265
  },
  {
   "id": 39,
   "kind": "generator",
   "v_base": 1.03
  }
 ],
 "branches": [
  {
   "from": 1,
   "to": 2,
   "r": 0.0035,
   "x": 0.0411,
   "charging": 0.6987
  },
  {
   "from": 1,
   "to": 39,
   "r": 0.001,
   "x": 0.025,
   "charging": 0.75
  },
  {
   "from": 2,
   "to": 3,
   "r": 0.0013,
   "x": 0.0151,
   "charging": 0.2572
  },
  {
   "from": 2,
   "to": 25,
   "r": 0.007,
   "x": 0.0086,
   "charging": 0.146
  },
  {
   "from": 2,
   "to": 30,
   "r": 0.0,
   "x": 0.0181,
   "tap": 1.025
  },
  {
   "from": 3,
   "to": 4,
   "r": 0.0013,
   "x": 0.0213,
   "charging": 0.2214
  },
  {
   "from": 3,
   "to": 18,
   "r": 0.0011,
   "x": 0.0133,
   "charging": 0.2138
  },
  {
   "from": 4,
   "to": 5,
   "r": 0.0008,
   "x": 0.0128,
   "charging": 0.1342
  },
  {
   "from": 4,
   "to": 14,
   "r": 0.0008,
   "x": 0.0129,
   "charging": 0.1382
  },
  {
   "from": 5,
   "to": 6,
   "r": 0.0002,
   "x": 0.0026,
   "charging": 0.0434
  },
  {
   "from": 5,
   "to": 8,
   "r": 0.0008,
   "x": 0.0112,
   "charging": 0.1476
  },
  {
   "from": 6,
   "to": 7,
   "r": 0.0006,
   "x": 0.0092,
   "charging": 0.113
  },
  {
   "from": 6,
   "to": 11,
   "r": 0.0007,
   "x": 0.0082,
   "charging": 0.1389
  },
  {
   "from": 6,
   "to": 31,
   "r": 0.0,
   "x": 0.025,
   "tap": 1.07
  },
  {
   "from": 7,
   "to": 8,
   "r": 0.0004,
   "x": 0.0046,
   "charging": 0.078
  },
  {
   "from": 8,
   "to": 9,
   "r": 0.0023,
   "x": 0.0363,
   "charging": 0.3804
  },
  {
   "from": 9,
   "to": 39,
   "r": 0.001,
   "x": 0.025,
   "charging": 1.2
  },
  {
   "from": 10,
   "to": 11,
   "r": 0.0004,
   "x": 0.0043,
   "charging": 0.0729
  },
  {
   "from": 10,
   "to": 13,
   "r": 0.0004,
   "x": 0.0043,
   "charging": 0.0729
  },
  {
   "from": 10,
   "to": 32,
   "r": 0.0,
   "x": 0.02,
   "tap": 1.07
  },
  {
   "from": 12,
   "to": 11,
   "r": 0.0016,
   "x": 0.0435,
   "tap": 1.006
  },
  {
   "from": 12,
   "to": 13,
   "r": 0.0016,
   "x": 0.0435,
   "tap": 1.006
  },
  {
   "from": 13,
   "to": 14,
   "r": 0.0009,
   "x": 0.0101,
   "charging": 0.1723
  },
  {
   "from": 14,
   "to": 15,
   "r": 0.0018,
   "x": 0.0217,
   "charging": 0.366
  },
  {
   "from": 15,
   "to": 16,
   "r": 0.0009,
   "x": 0.0094,
   "charging": 0.171
  },
  {
   "from": 16,
   "to": 17,
   "r": 0.0007,
   "x": 0.0089,
   "charging": 0.1342
  },
  {
   "from": 16,
   "to": 19,
   "r": 0.0016,
   "x": 0.0195,
   "charging": 0.304
  },
  {
   "from": 16,
   "to": 21,
   "r": 0.0008,
   "x": 0.0135,
   "charging": 0.2548
  },
  {
   "from": 16,
   "to": 24,
   "r": 0.0003,
   "x": 0.0059,
   "charging": 0.068
  },
  {
   "from": 17,
   "to": 18,
   "r": 0.0007,
   "x": 0.0082,
   "charging": 0.1319
  },
  {
   "from": 17,
   "to": 27,
   "r": 0.0013,
   "x": 0.0173,
   "charging": 0.3216
  },
  {
   "from": 19,
   "to": 20,
   "r": 0.0007,
   "x": 0.0138,
   "tap": 1.06
  },
  {
   "from": 19,
   "to": 33,
   "r": 0.0007,
   "x": 0.0142,
   "tap": 1.07
  },
  {
   "from": 20,
   "to": 34,
   "r": 0.0009,
   "x": 0.018,
   "tap": 1.009
  },
  {
   "from": 21,
   "to": 22,
   "r": 0.0008,
   "x": 0.014,
   "charging": 0.2565
  },
  {
   "from": 22,
   "to": 23,
   "r": 0.0006,
   "x": 0.0096,
   "charging": 0.1846
  },
  {
   "from": 22,
   "to": 35,
   "r": 0.0,
   "x": 0.0143,
   "tap": 1.025
  },
  {
   "from": 23,
   "to": 24,
   "r": 0.0022,
   "x": 0.035,
   "charging": 0.361
  },
  {
   "from": 23,
   "to": 36,
   "r": 0.0005,
   "x": 0.0272
  },
  {
   "from": 25,
   "to": 26,
   "r": 0.0032,
   "x": 0.0323,
   "charging": 0.531
  },
  {
   "from": 25,
   "to": 37,
   "r": 0.0006,
   "x": 0.0232,
   "tap": 1.025
  },
  {
   "from": 26,
   "to": 27,
   "r": 0.0014,
   "x": 0.0147,
   "charging": 0.2396
  },
  {
   "from": 26,
   "to": 28,
   "r": 0.0043,
   "x": 0.0474,
   "charging": 0.7802
  },
  {
   "from": 26,
   "to": 29,
   "r": 0.0057,
   "x": 0.0625,
   "charging": 1.029
  },
  {
   "from": 28,
   "to": 29,
   "r": 0.0014,
   "x": 0.0151,
   "charging": 0.249
  },
  {
   "from": 29,
   "to": 38,
   "r": 0.0008,
   "x": 0.0156,
   "tap": 1.025
  }
 ],
 "generators": [
  {
   "bus": 30,
   "p_mech": 2.5,
   "inertia": 42.0,
   "damping": 336.0,
   "xd_prime": 0.031
  },
  {
   "bus": 31,
   "p_mech": 6.68671,
   "inertia": 30.3,
   "damping": 242.4,
   "xd_prime": 0.0697
  },
  {
   "bus": 32,
   "p_mech": 6.5,
   "inertia": 35.8,
   "damping": 286.4,
   "xd_prime": 0.0531
  },
  {
   "bus": 33,
   "p_mech": 6.32,
   "inertia": 28.6,
   "damping": 228.8,
   "xd_prime": 0.0436
  },
  {
   "bus": 34,
   "p_mech": 5.08,
   "inertia": 26.0,
   "damping": 208.0,
   "xd_prime": 0.132
  },
  {
   "bus": 35,
   "p_mech": 6.5,
   "inertia": 34.8,
   "damping": 278.4,
   "xd_prime": 0.05
  },
  {
   "bus": 36,
   "p_mech": 5.6,
   "inertia": 26.4,
   "damping": 211.2,
   "xd_prime": 0.049
  },
  {
   "bus": 37,
   "p_mech": 5.4,
   "inertia": 24.3,
   "damping": 194.4,
   "xd_prime": 0.057
  },
  {
   "bus": 38,
   "p_mech": 8.3,
   "inertia": 34.5,
   "damping": 276.0,
   "xd_prime": 0.057
  },
  {
   "bus": 39,
   "p_mech": -1.04,
   "inertia": 500.0,
   "damping": 4000.0,
   "xd_prime": 0.006
  }
 ],
 "loads": [
  {
   "bus": 1,
   "p": 0.976,
   "q": 0.442,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 3,
   "p": 3.22,
   "q": 0.024,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 4,
   "p": 5.0,
   "q": 1.84,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 7,
   "p": 2.338,
   "q": 0.84,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 8,
   "p": 5.22,
   "q": 1.766,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 9,
   "p": 0.065,
   "q": -0.666,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 12,
   "p": 0.0853,
   "q": 0.88,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 15,
   "p": 3.2,
   "q": 1.53,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 16,
   "p": 3.29,
   "q": 0.323,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 18,
   "p": 1.58,
   "q": 0.3,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 20,
   "p": 6.8,
   "q": 1.03,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 21,
   "p": 2.74,
   "q": 1.15,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 23,
   "p": 2.475,
   "q": 0.846,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 24,
   "p": 3.086,
   "q": -0.922,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 25,
   "p": 2.24,
   "q": 0.472,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 26,
   "p": 1.39,
   "q": 0.17,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 27,
   "p": 2.81,
   "q": 0.755,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 28,
   "p": 2.06,
   "q": 0.276,
   "motor_fraction": 0.5,
   "motor": "default"
  },
  {
   "bus": 29,
   "p": 2.835,
   "q": 0.269,
   "motor_fraction": 0.5,
   "motor": "default"
  }
 ]
}
)json";

}  // namespace stvs::grid
