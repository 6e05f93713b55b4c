mod common;

use std::fs;

use fixrank::bugclass::PatternSet;
use fixrank::corpus::{Corpus, ReviewStatus};
use fixrank::miner::{mine_into, MinerConfig};
use fixrank::patchclass::PatchClassifier;
use fixrank::review::{export_review_queue, import_review_verdicts, parse_review_file, REVIEW_HEADER};
use fixrank::trainer::prepare_records;
use fixrank::unidiff::SourceFilter;
use fixrank::Error;

fn mined() -> (tempfile::TempDir, Corpus, Vec<String>) {
    let repo = tempfile::tempdir().unwrap();
    common::build_mining_fixture(repo.path());
    let store = tempfile::tempdir().unwrap();
    let corpus = Corpus::open(store.path()).unwrap();
    let patterns = PatternSet::default();
    mine_into(repo.path(), "demo", &MinerConfig::new("main", &patterns), &patterns, &corpus).unwrap();
    let ids = corpus.ids().unwrap();
    (store, corpus, ids)
}

fn review_text(blocks: &[(&str, &[(&str, &str)])]) -> String {
    let mut s = format!("{REVIEW_HEADER}\n");
    for (id, verdicts) in blocks {
        s.push_str(&format!("\nid: {id}\n"));
        for (who, v) in *verdicts {
            s.push_str(&format!("verdict[{who}]: {v}\n"));
        }
    }
    s
}

#[test]
fn export_lists_pending_records_in_corpus_order() {
    let (store, corpus, ids) = mined();
    assert_eq!(ids.len(), 3);
    let out = store.path().join("queue.txt");
    assert_eq!(export_review_queue(&corpus, &out).unwrap(), 3);
    let entries = parse_review_file(&fs::read_to_string(&out).unwrap()).unwrap();
    let listed: Vec<&str> = entries.iter().map(|e| e.triple_id.as_str()).collect();
    assert_eq!(listed, ids.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(entries.iter().all(|e| e.verdicts.is_empty()));
}

#[test]
fn empty_queue_is_just_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = Corpus::open(dir.path().join("corpus")).unwrap();
    let out = dir.path().join("queue.txt");
    assert_eq!(export_review_queue(&corpus, &out).unwrap(), 0);
    assert_eq!(fs::read_to_string(&out).unwrap().trim_end(), REVIEW_HEADER);
}

#[test]
fn verdicts_decide_the_status() {
    let (store, corpus, ids) = mined();
    let file = store.path().join("review.txt");
    fs::write(
        &file,
        review_text(&[
            (&ids[0], &[("ann", "accept"), ("bo", "accept")]),
            (&ids[1], &[("ann", "accept"), ("bo", "reject")]),
            (&ids[2], &[("ann", "accept")]),
        ]),
    )
    .unwrap();
    let summary = import_review_verdicts(&corpus, &file).unwrap();
    assert_eq!((summary.accepted, summary.rejected, summary.pending), (1, 1, 1));
    assert_eq!(corpus.read(&ids[0]).unwrap().status(), ReviewStatus::Accepted);
    assert_eq!(corpus.read(&ids[1]).unwrap().status(), ReviewStatus::Rejected);
    assert_eq!(corpus.read(&ids[2]).unwrap().status(), ReviewStatus::Pending);

    // Only the half-reviewed record is exported again, with its verdict kept.
    let out = store.path().join("queue2.txt");
    assert_eq!(export_review_queue(&corpus, &out).unwrap(), 1);
    let again = parse_review_file(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(again[0].triple_id, ids[2]);
    assert_eq!(again[0].verdicts, vec![("ann".to_string(), true)]);

    // Training sees exactly the accepted record.
    let mut records = corpus.load_all().unwrap();
    let (used, summary) = prepare_records(&mut records, &PatchClassifier::default(), &SourceFilter::default(), false).unwrap();
    assert_eq!(used.iter().map(|r| r.triple_id.as_str()).collect::<Vec<_>>(), vec![ids[0].as_str()]);
    assert_eq!(summary.not_accepted, 2);
    let (all, _) = prepare_records(&mut records, &PatchClassifier::default(), &SourceFilter::default(), true).unwrap();
    assert_eq!(all.len(), 3);
}

#[test]
fn unknown_ids_leave_the_corpus_untouched() {
    let (store, corpus, ids) = mined();
    let file = store.path().join("review.txt");
    fs::write(&file, review_text(&[(&ids[0], &[("ann", "accept")]), ("demo-999999-0000000000", &[("ann", "accept")])])).unwrap();
    let before = fs::read_to_string(corpus.dir().join(format!("{}.triple", ids[0]))).unwrap();
    assert!(matches!(import_review_verdicts(&corpus, &file), Err(Error::UnknownTripleId(_))));
    let after = fs::read_to_string(corpus.dir().join(format!("{}.triple", ids[0]))).unwrap();
    assert_eq!(before, after);
}

#[test]
fn malformed_review_files_are_rejected() {
    let (store, corpus, ids) = mined();
    let file = store.path().join("review.txt");
    for text in [
        format!("id: {}\nverdict[ann]: accept\n", ids[0]),
        format!("{REVIEW_HEADER}\n\nid: {}\nverdict[ann]: maybe\n", ids[0]),
        format!("{REVIEW_HEADER}\n\nid: {0}\n\nid: {0}\n", ids[0]),
    ] {
        fs::write(&file, text).unwrap();
        assert!(matches!(import_review_verdicts(&corpus, &file), Err(Error::MalformedReviewFile { .. })));
    }
}
