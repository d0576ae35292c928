// Copyright 2026 The Pairscale Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PAIRSCALE_GAUSSIAN_H_
#define PAIRSCALE_GAUSSIAN_H_

namespace pairscale {

double NormalPdf(double x);
double NormalCdf(double x);
// log(NormalCdf(x)), accurate far into the lower tail.
double LogNormalCdf(double x);
// NormalPdf(x) / NormalCdf(x), accurate far into the lower tail.
double InverseMillsRatio(double x);
// Quantile function of the standard normal. p must lie in (0, 1).
double InverseNormalCdf(double p);

}  // namespace pairscale

#endif  // PAIRSCALE_GAUSSIAN_H_
