/*
 * Copyright 2026 The ladp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LADP_LADP_H_
#define LADP_LADP_H_

#include "ladp/accountant.h"
#include "ladp/config.h"
#include "ladp/convergence_bound.h"
#include "ladp/dataset.h"
#include "ladp/dataset_io.h"
#include "ladp/dp_mechanism.h"
#include "ladp/experiment.h"
#include "ladp/fl_runtime.h"
#include "ladp/model.h"
#include "ladp/partition.h"
#include "ladp/rng.h"
#include "ladp/status.h"
#include "ladp/synthetic.h"
#include "ladp/tensor.h"

#endif  // LADP_LADP_H_
