#pragma once

// Umbrella header for the concept-distillation library.  Deliberately does
// not pull in http_client.hpp (and with it the HTTP stack); include that
// separately where live endpoints are actually used.

#include "cdist/cache_key.hpp"
#include "cdist/concepts.hpp"
#include "cdist/config.hpp"
#include "cdist/context.hpp"
#include "cdist/decoding.hpp"
#include "cdist/digest.hpp"
#include "cdist/errors.hpp"
#include "cdist/evaluate.hpp"
#include "cdist/gateway.hpp"
#include "cdist/induction.hpp"
#include "cdist/item_list.hpp"
#include "cdist/judge.hpp"
#include "cdist/ledger.hpp"
#include "cdist/message.hpp"
#include "cdist/mock.hpp"
#include "cdist/numeric.hpp"
#include "cdist/orchestrator.hpp"
#include "cdist/prompting.hpp"
#include "cdist/protocol.hpp"
#include "cdist/report.hpp"
#include "cdist/sandbox.hpp"
#include "cdist/tasks.hpp"
#include "cdist/util.hpp"
#include "cdist/verification.hpp"
