//! Sorting helpers for products of odd generators.

/// Sorts `v` in place and returns the parity of the sorting permutation as
/// `±1`. Returns `None` if two entries are equal, since the product of an odd
/// generator with itself vanishes.
pub fn sort_odd<T: Ord>(v: &mut [T]) -> Option<i8> {
    let mut sign = 1i8;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return None;
        }
    }
    Some(sign)
}

/// Sign of the shuffle that moves every element flagged `true` in front of
/// every element flagged `false`, keeping relative orders.
pub fn shuffle_sign(flags: &[bool]) -> i8 {
    let mut seen_false = 0usize;
    let mut swaps = 0usize;
    for &f in flags {
        if f {
            swaps += seen_false;
        } else {
            seen_false += 1;
        }
    }
    if swaps.is_multiple_of(2) {
        1
    } else {
        -1
    }
}
