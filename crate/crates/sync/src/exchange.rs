//! Pairwise anti-entropy session run when two nodes come into contact.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::bundle::{Bundle, BundleId, NodeId};
use crate::store::{NodeStore, Receipt, SummaryVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    /// Replicate every bundle the peer lacks.
    Epidemic,
    /// Hand a bundle over only when the peer is its destination.
    Direct,
}

/// How many bundles may cross during one contact, in both directions combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactBudget {
    Limited(u64),
    Unlimited,
}

impl ContactBudget {
    /// `floor(duration * bandwidth)` bundles; an infinite product is unlimited.
    pub fn from_contact(duration_secs: f64, bundles_per_sec: f64) -> Self {
        let total = duration_secs * bundles_per_sec;
        if total.is_infinite() && total > 0.0 {
            ContactBudget::Unlimited
        } else if total.is_nan() || total <= 0.0 {
            ContactBudget::Limited(0)
        } else {
            ContactBudget::Limited(total.floor() as u64)
        }
    }

    fn allows(&self, used: u64) -> bool {
        match self {
            ContactBudget::Limited(n) => used < *n,
            ContactBudget::Unlimited => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: NodeId,
    pub to: NodeId,
    /// The copy as received, hop count already incremented.
    pub bundle: Bundle,
    pub receipt: Receipt,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeLog {
    pub now: Option<DateTime<Utc>>,
    pub purged: Vec<(NodeId, BundleId)>,
    pub transfers: Vec<Transfer>,
    /// True when candidates were left behind because the budget ran out.
    pub budget_exhausted: bool,
}

impl ExchangeLog {
    pub fn delivered(&self) -> impl Iterator<Item = &Transfer> {
        self.transfers
            .iter()
            .filter(|t| matches!(t.receipt, Receipt::Delivered { .. }))
    }
}

fn candidates<'a>(
    from: &'a NodeStore,
    peer: &SummaryVector,
    now: DateTime<Utc>,
    routing: Routing,
) -> impl Iterator<Item = &'a Bundle> + 'a {
    let peer_id = peer.node_id.clone();
    let wanted: Vec<BundleId> = from
        .held()
        .filter(|b| !b.is_expired(now) && peer.wants(&b.id))
        .map(|b| b.id)
        .collect();
    wanted.into_iter().filter_map(move |id| {
        let b = from.get(&id)?;
        match routing {
            Routing::Epidemic => Some(b),
            Routing::Direct => b.destination.is(&peer_id).then_some(b),
        }
    })
}

/// Runs one contact between `a` and `b`.
///
/// Both sides purge expired bundles and swap summary vectors; then bundles
/// the peer lacks cross in transfer order (elevated first, then oldest
/// created) until the budget is spent. Acks emitted on delivery wait for the
/// next contact.
pub fn exchange(
    a: &mut NodeStore,
    b: &mut NodeStore,
    now: DateTime<Utc>,
    budget: ContactBudget,
    routing: Routing,
) -> ExchangeLog {
    let mut log = ExchangeLog {
        now: Some(now),
        ..ExchangeLog::default()
    };
    for store in [&mut *a, &mut *b] {
        let node = store.node_id().clone();
        log.purged
            .extend(store.purge_expired(now).into_iter().map(|id| (node.clone(), id)));
    }

    let sv_a = a.summary_vector(now);
    let sv_b = b.summary_vector(now);

    // (direction, bundle): false = a→b, true = b→a
    let mut queue: Vec<(bool, Bundle)> = candidates(a, &sv_b, now, routing)
        .map(|x| (false, x.clone()))
        .chain(candidates(b, &sv_a, now, routing).map(|x| (true, x.clone())))
        .collect();
    queue.sort_by(|(da, x), (db, y)| x.transfer_order(y).then(da.cmp(db)));

    let mut used = 0u64;
    for (reverse, bundle) in queue {
        if !budget.allows(used) {
            log.budget_exhausted = true;
            break;
        }
        let (from, to) = if reverse { (&*b, &mut *a) } else { (&*a, &mut *b) };
        let from_id = from.node_id().clone();
        // A copy may already have arrived through the other direction.
        if to.holds(&bundle.id) {
            continue;
        }
        let mut copy = bundle;
        copy.hop_count += 1;
        let receipt = to.receive(copy.clone(), now);
        used += 1;
        log.transfers.push(Transfer {
            from: from_id,
            to: to.node_id().clone(),
            bundle: copy,
            receipt,
        });
    }
    log
}

/// Re-applies a recorded exchange to the two stores. Applying a transcript
/// any number of times leaves the stores as applying it once does.
pub fn apply_transcript(log: &ExchangeLog, a: &mut NodeStore, b: &mut NodeStore) {
    let Some(now) = log.now else { return };
    a.purge_expired(now);
    b.purge_expired(now);
    for t in &log.transfers {
        let to = if &t.to == a.node_id() { &mut *a } else { &mut *b };
        to.receive(t.bundle.clone(), now);
    }
}
