#pragma once

#include "lakescout/catalog.hpp"
#include "lakescout/error.hpp"
#include "lakescout/eval.hpp"
#include "lakescout/ground_truth.hpp"
#include "lakescout/join_metric.hpp"
#include "lakescout/model.hpp"
#include "lakescout/profile.hpp"
#include "lakescout/profile_store.hpp"
#include "lakescout/search.hpp"
#include "lakescout/synthetic.hpp"
#include "lakescout/training.hpp"
