use super::record::InteractionRecord;

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn record_hash(seed: u64, position: usize, r: &InteractionRecord) -> u64 {
    let mut h = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    h = mix(h ^ position as u64);
    for &f in &r.features {
        h = mix(h ^ u64::from(f));
    }
    h = mix(h ^ u64::from(r.y_target));
    for &y in &r.y_sources {
        h = mix(h ^ u64::from(y));
    }
    h
}

/// Partitions records into (train, test) by a seeded hash of each record and
/// its position, preserving relative order within each side.
pub fn split(
    records: &[InteractionRecord],
    train_fraction: f64,
    seed: u64,
) -> (Vec<InteractionRecord>, Vec<InteractionRecord>) {
    let threshold = train_fraction.clamp(0.0, 1.0);
    let mut train = Vec::with_capacity((records.len() as f64 * threshold) as usize + 1);
    let mut test = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let u = (record_hash(seed, i, r) >> 11) as f64 / (1u64 << 53) as f64;
        if u < threshold {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::NUM_FIELDS;

    fn records(n: usize) -> Vec<InteractionRecord> {
        (0..n)
            .map(|i| InteractionRecord {
                features: [(i % 7) as u32; NUM_FIELDS],
                y_target: 0,
                y_sources: vec![0],
            })
            .collect()
    }

    #[test]
    fn fraction_is_respected_within_binomial_noise() {
        let (train, test) = split(&records(1000), 0.8, 3);
        assert_eq!(train.len() + test.len(), 1000);
        // sd = sqrt(1000 * 0.8 * 0.2) ≈ 12.6; allow 4 sd.
        assert!((train.len() as i64 - 800).abs() <= 51, "{}", train.len());
    }

    #[test]
    fn same_seed_same_split() {
        let rs = records(500);
        assert_eq!(split(&rs, 0.7, 11), split(&rs, 0.7, 11));
        assert_ne!(split(&rs, 0.7, 11).0, split(&rs, 0.7, 12).0);
    }

    #[test]
    fn every_record_lands_exactly_once() {
        // Content duplicates (i % 7) must still be partitioned by position.
        let rs = records(300);
        let mut taken = vec![0; rs.len()];
        let (train, test) = split(&rs, 0.5, 1);
        let mut cursor = (0, 0);
        for (i, r) in rs.iter().enumerate() {
            if cursor.0 < train.len() && &train[cursor.0] == r && record_goes_to_train(&rs, i) {
                cursor.0 += 1;
                taken[i] += 1;
            } else if cursor.1 < test.len() && &test[cursor.1] == r {
                cursor.1 += 1;
                taken[i] += 1;
            }
        }
        assert!(taken.iter().all(|&t| t == 1));
        assert_eq!(cursor, (train.len(), test.len()));
    }

    fn record_goes_to_train(rs: &[InteractionRecord], i: usize) -> bool {
        ((record_hash(1, i, &rs[i]) >> 11) as f64 / (1u64 << 53) as f64) < 0.5
    }
}
