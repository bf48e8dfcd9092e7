// Umbrella header.
#pragma once

#include "confuse/attack/pgd.hpp"
#include "confuse/core/errors.hpp"
#include "confuse/core/grid.hpp"
#include "confuse/core/image.hpp"
#include "confuse/core/mask.hpp"
#include "confuse/core/perturbation.hpp"
#include "confuse/core/rng.hpp"
#include "confuse/eval/ecr.hpp"
#include "confuse/eval/taxonomy.hpp"
#include "confuse/eval/transfer.hpp"
#include "confuse/model/bilinear.hpp"
#include "confuse/model/grad_check.hpp"
#include "confuse/model/surrogate.hpp"
#include "confuse/model/toy.hpp"
#include "confuse/objective/entropy.hpp"
