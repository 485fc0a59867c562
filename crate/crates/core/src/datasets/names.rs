use super::Gender;

const MALE: &[&str] = &[
    "George", "Dale", "Joseph", "Nicholas", "Milton", "Glen", "Samuel", "Arthur", "Henry",
    "Walter", "Frank", "Harold", "Raymond", "Eugene", "Ralph", "Howard", "Francis", "Roy",
    "Louis", "Russell", "Bobby", "Victor", "Martin", "Ernest", "Phillip", "Todd", "Jesse",
    "Craig", "Alan", "Shawn", "Clarence", "Sean", "Chris", "Johnny", "Earl", "Jimmy",
    "Antonio", "Danny", "Bryan", "Tony", "Luis", "Mike", "Stanley", "Leonard", "Nathan",
    "Wayne", "Manuel", "Rodney", "Curtis", "Norman",
];

const FEMALE: &[&str] = &[
    "Nancy", "Ashley", "Lillian", "Katherine", "Carrie", "Natasha", "Antonia", "Ruth",
    "Dorothy", "Helen", "Sandra", "Donna", "Carol", "Michelle", "Emily", "Amanda", "Melissa",
    "Deborah", "Stephanie", "Rebecca", "Sharon", "Laura", "Cynthia", "Kathleen", "Amy",
    "Angela", "Shirley", "Anna", "Brenda", "Pamela", "Nicole", "Emma", "Samantha",
    "Christine", "Debra", "Rachel", "Catherine", "Carolyn", "Janet", "Maria", "Heather",
    "Diane", "Julie", "Joyce", "Victoria", "Kelly", "Christina", "Joan", "Evelyn", "Judith",
];

/// Hands out names that are unique across everything it has named.
#[derive(Debug, Default, Clone)]
pub(crate) struct NameSource {
    male: usize,
    female: usize,
}

impl NameSource {
    pub(crate) fn next(&mut self, gender: Gender) -> String {
        let (pool, counter) = match gender {
            Gender::Male => (MALE, &mut self.male),
            Gender::Female => (FEMALE, &mut self.female),
        };
        let i = *counter;
        *counter += 1;
        let base = pool[i % pool.len()];
        let round = i / pool.len();
        if round == 0 {
            base.to_string()
        } else {
            format!("{base}{}", round + 1)
        }
    }
}
