//! In-process retrieval sessions: encode, query, answer per server, decode.

use alloc::vec::Vec;

use rand::Rng;

use crate::combiner::Provenance;
use crate::error::{Error, Result};
use crate::scheme::{answer_all, decode, gen_queries, Payload, QueryPlan, SchemeId, SchemeInstance};
use crate::seed::rng_from_seed;
use crate::storage::ShareSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    pub upload: usize,
    pub download: usize,
    pub download_per_server: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub scheme: SchemeId,
    pub p: u32,
    /// Seed of the session generator, when the session was seeded.
    pub seed: Option<u64>,
    /// 0-based desired message.
    pub theta: usize,
    pub queries: Vec<Payload>,
    pub answers: Vec<Vec<u32>>,
    /// `stored[message]`: what each server holds.
    pub stored: Vec<ShareSet>,
    pub decoded: core::result::Result<Vec<u32>, Error>,
    pub counts: Counts,
    pub provenance: Option<Provenance>,
}

impl Transcript {
    pub fn decode_ok(&self) -> bool {
        self.decoded.is_ok()
    }
}

/// Colluding servers' part of a transcript.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct View {
    pub servers: Vec<usize>,
    pub queries: Vec<Payload>,
    pub answers: Vec<Vec<u32>>,
    /// `shares[i][message]` for `servers[i]`.
    pub shares: Vec<Vec<Vec<u32>>>,
}

fn check_messages(scheme: &SchemeInstance, messages: &[Vec<u32>]) -> Result<()> {
    let p = &scheme.params;
    if messages.len() != p.k {
        return Err(Error::ShapeMismatch(alloc::format!("{} messages, scheme has K={}", messages.len(), p.k)));
    }
    for m in messages {
        if m.len() != p.l {
            return Err(Error::ShapeMismatch(alloc::format!("message length {}, scheme has L={}", m.len(), p.l)));
        }
        if m.iter().any(|&x| x >= p.field.p()) {
            return Err(Error::ShapeMismatch("message symbol out of field".into()));
        }
    }
    Ok(())
}

/// Full session with caller-supplied messages.
pub fn run_session<R: Rng + ?Sized>(scheme: &SchemeInstance, messages: &[Vec<u32>], theta: usize, rng: &mut R) -> Result<Transcript> {
    check_messages(scheme, messages)?;
    let stored: Vec<ShareSet> = messages.iter().map(|m| scheme.code.encode(m)).collect::<Result<_>>()?;
    let plan = gen_queries(scheme, theta, rng)?;
    Ok(finish(scheme, plan, stored, None))
}

fn finish(scheme: &SchemeInstance, plan: QueryPlan, stored: Vec<ShareSet>, seed: Option<u64>) -> Transcript {
    let answers = answer_all(scheme, &plan, &stored);
    let (answers, decoded) = match answers {
        Ok(a) => {
            let d = decode(scheme, &plan, &a);
            (a.answers, d)
        }
        Err(e) => (Vec::new(), Err(e)),
    };
    let download_per_server: Vec<usize> = answers.iter().map(|a| a.len()).collect();
    let counts = Counts {
        upload: plan.queries.iter().map(|q| q.upload_symbols()).sum(),
        download: download_per_server.iter().sum(),
        download_per_server,
    };
    Transcript {
        scheme: scheme.id,
        p: scheme.params.field.p(),
        seed,
        theta: plan.theta,
        queries: plan.queries,
        answers,
        stored,
        decoded,
        counts,
        provenance: scheme
            .combiner
            .as_ref()
            .map(|c| c.provenance)
            .or_else(|| scheme.aligned().filter(|a| a.per_session_combiner).map(|_| Provenance::RandomPerSession)),
    }
}

/// Uniform messages for the scheme.
pub fn random_messages<R: Rng + ?Sized>(scheme: &SchemeInstance, rng: &mut R) -> Vec<Vec<u32>> {
    let p = &scheme.params;
    (0..p.k).map(|_| (0..p.l).map(|_| rng.gen_range(0..p.field.p())).collect()).collect()
}

/// Session fully determined by `(scheme, seed, theta)`: messages are drawn
/// first from the seeded generator, then the queries.
pub fn run_seeded(scheme: &SchemeInstance, theta: usize, seed: u64) -> Result<(Vec<Vec<u32>>, Transcript)> {
    let mut rng = rng_from_seed(seed);
    let messages = random_messages(scheme, &mut rng);
    let mut t = run_session(scheme, &messages, theta, &mut rng)?;
    t.seed = Some(seed);
    Ok((messages, t))
}

/// Restricts a transcript to `servers` (0-based).
pub fn adversary_view(t: &Transcript, servers: &[usize]) -> Result<View> {
    let n = t.queries.len();
    if servers.iter().any(|&s| s >= n) {
        return Err(Error::BadParams(alloc::format!("collusion set {servers:?} exceeds {n} servers")));
    }
    Ok(View {
        servers: servers.to_vec(),
        queries: servers.iter().map(|&s| t.queries[s].clone()).collect(),
        answers: servers.iter().map(|&s| t.answers.get(s).cloned().unwrap_or_default()).collect(),
        shares: servers.iter().map(|&s| t.stored.iter().map(|m| m.shares[s].clone()).collect()).collect(),
    })
}
