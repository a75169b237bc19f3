from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from datetime import date, timedelta
from typing import Any, NamedTuple

import equinox as eqx
import numpy as np
from dateutil.easter import easter
from scipy.cluster.hierarchy import fcluster, linkage

from ._utils import obj_type_str
from .errors import ArtifactError

__all__ = [
    'RESPONSE_TYPES',
    'STATUSES',
    'OUTCOMES',
    'WorkloadInputs',
    'ResponseEvent',
    'InquiryCase',
    'OutcomeCount',
    'ClusterPoint',
    'workload_score',
    'german_public_holidays',
    'legal_deadline',
    'classify_outcome',
    'outcome_summary',
    'response_timeline',
    'cluster_points',
    'load_cases',
    'write_cases_csv',
]

logger = logging.getLogger(__name__)

RESPONSE_TYPES = ('automatic', 'mixed', 'human')
STATUSES = ('access', 'no_data', 'denied', 'in_process')
OUTCOMES = (
    'got_access',
    'no_data_stored',
    'access_denied',
    'in_process',
    'no_response',
)
CHANNELS = ('email', 'web_form')
DEADLINE_MODES = ('calendar', 'business')

LEGAL_PERIOD_DAYS = 30

_OUTCOME_OF_STATUS = {
    'access': 'got_access',
    'no_data': 'no_data_stored',
    'denied': 'access_denied',
    'in_process': 'in_process',
}

# same-day status events resolve to the highest precedence
_PRECEDENCE = {'denied': 3, 'access': 2, 'no_data': 1, 'in_process': 0}

# weights of the emails sent before and after access, and of the online and
# offline actions
_WORKLOAD_WEIGHTS = (5, 2, 10, 30)


class WorkloadInputs(NamedTuple):
    """Effort counts of a subject access request.

    Attributes:
        m_pre: Emails sent before getting access.
        m_post: Emails sent after getting access.
        a_online: Online actions (web forms, account logins).
        a_offline: Offline actions (postal letters, signed documents).
    """

    m_pre: int = 0
    m_post: int = 0
    a_online: int = 0
    a_offline: int = 0


class ResponseEvent(NamedTuple):
    """A reply received for a subject access request.

    Attributes:
        date: Reception date.
        response_type: `automatic`, `mixed` or `human`.
        status: State of the request the reply conveys: `access`, `no_data`,
            `denied` or `in_process`.
        counts_toward_workload: `False` for ticket-system status notifications,
            which are left out of response counts.
    """

    date: date
    response_type: str
    status: str = 'in_process'
    counts_toward_workload: bool = True


class InquiryCase(eqx.Module):
    """Subject access request sent to one company.

    Attributes:
        company _(str)_: Inquired company.
        channel _(str)_: `email` or `web_form`.
        sent_date _(date)_: Date the request was sent.
        events _(tuple of ResponseEvent)_: Replies, sorted by date.
        workload _(WorkloadInputs)_: Effort counts.
    """

    company: str
    channel: str
    sent_date: date
    events: tuple[ResponseEvent, ...]
    workload: WorkloadInputs = WorkloadInputs()

    def __init__(
        self,
        company: str,
        channel: str,
        sent_date: date,
        events: Iterable[ResponseEvent] = (),
        workload: WorkloadInputs = WorkloadInputs(),  # noqa: B008
    ):
        self.company = company
        self.channel = channel
        self.sent_date = sent_date
        # stable sort keeps the given order of same-day events
        self.events = tuple(sorted(events, key=lambda e: e.date))
        self.workload = workload

    def __check_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(
                f'Argument `channel` must be one of {CHANNELS}, but is'
                f' {self.channel!r}.'
            )
        for event in self.events:
            if event.date < self.sent_date:
                raise ValueError(
                    f'Case {self.company!r} has an event on {event.date}, before the'
                    f' request was sent on {self.sent_date}.'
                )
            if event.response_type not in RESPONSE_TYPES:
                raise ValueError(
                    f'Response type must be one of {RESPONSE_TYPES}, but is'
                    f' {event.response_type!r}.'
                )
            if event.status not in STATUSES:
                raise ValueError(
                    f'Status must be one of {STATUSES}, but is {event.status!r}.'
                )
        if any(v < 0 for v in self.workload):
            raise ValueError(
                f'Workload counts must be nonnegative, but are {self.workload}.'
            )

    @property
    def outcome(self) -> str:
        """Final outcome, all events considered."""
        return classify_outcome(self)


def workload_score(w: WorkloadInputs) -> int:
    """Returns the workload score of a request.

    The score weighs each email sent before access by 5, each email sent after
    access by 2, each online action by 10 and each offline action by 30.

    Examples:
        >>> cs.workload_score(cs.WorkloadInputs(2, 1, 1, 1))
        52
    """
    if any(v < 0 for v in w):
        raise ValueError(f'Workload counts must be nonnegative, but are {w}.')
    return sum(weight * count for weight, count in zip(_WORKLOAD_WEIGHTS, w))


# === deadlines


def german_public_holidays(years: Iterable[int]) -> list[date]:
    """Returns the nationwide public holidays of Germany in the given years.

    Examples:
        >>> [str(d) for d in cs.german_public_holidays([2018])][:4]
        ['2018-01-01', '2018-03-30', '2018-04-02', '2018-05-01']
    """
    holidays = []
    for year in years:
        easter_sunday = easter(year)
        holidays += [
            date(year, 1, 1),
            easter_sunday - timedelta(days=2),  # Good Friday
            easter_sunday + timedelta(days=1),  # Easter Monday
            date(year, 5, 1),
            easter_sunday + timedelta(days=39),  # Ascension
            easter_sunday + timedelta(days=50),  # Whit Monday
            date(year, 10, 3),
            date(year, 12, 25),
            date(year, 12, 26),
        ]
    return sorted(holidays)


def legal_deadline(
    sent: date,
    mode: str = 'calendar',
    holidays: Iterable[date] | None = None,
) -> date:
    """Returns the end of the legal response period of a request.

    In `calendar` mode, the deadline is 30 days after the request, moved forward
    to the next weekday if it falls on a weekend. In `business` mode, it is the
    30th business day after the request.

    Args:
        sent: Date the request was sent.
        mode: `calendar` or `business`.
        holidays: Public holidays skipped in business mode, the nationwide German
            holidays of the year of `sent` and the next if `None`. Pass an empty
            sequence to count weekdays only.

    Returns:
        Deadline date.

    Examples:
        >>> from datetime import date
        >>> str(cs.legal_deadline(date(2018, 9, 21), 'calendar'))
        '2018-10-22'
        >>> str(cs.legal_deadline(date(2018, 9, 21), 'business'))
        '2018-11-05'
    """
    if mode not in DEADLINE_MODES:
        raise ValueError(
            f'Argument `mode` must be one of {DEADLINE_MODES}, but is {mode!r}.'
        )
    if not isinstance(sent, date):
        raise TypeError(
            f'Argument `sent` must be a `datetime.date`, but has type'
            f' {obj_type_str(sent)}.'
        )

    if mode == 'calendar':
        raw = np.datetime64(sent + timedelta(days=LEGAL_PERIOD_DAYS), 'D')
        deadline = np.busday_offset(raw, 0, roll='forward')
    else:
        if holidays is None:
            holidays = german_public_holidays([sent.year, sent.year + 1])
        calendar = np.busdaycalendar(
            holidays=np.array(list(holidays), dtype='datetime64[D]')
        )
        deadline = np.busday_offset(
            np.datetime64(sent, 'D'),
            LEGAL_PERIOD_DAYS,
            roll='forward',
            busdaycal=calendar,
        )
    return deadline.astype(object)


# === outcomes


def classify_outcome(case: InquiryCase, deadline: date | None = None) -> str:
    """Returns the outcome of a request at a deadline.

    The outcome follows the status of the latest event dated at or before the
    deadline; same-day events resolve by precedence `denied` > `access` >
    `no_data` > `in_process`. A request without any reply has no response, a
    request whose first reply comes after the deadline is in process.

    Args:
        case: Inquiry case.
        deadline: Cutoff date (inclusive), no cutoff if `None`.

    Returns:
        One of `got_access`, `no_data_stored`, `access_denied`, `in_process` or
        `no_response`.
    """
    if len(case.events) == 0:
        return 'no_response'
    events = [e for e in case.events if deadline is None or e.date <= deadline]
    if len(events) == 0:
        return 'in_process'
    latest = max(e.date for e in events)
    status = max(
        (e.status for e in events if e.date == latest), key=_PRECEDENCE.__getitem__
    )
    return _OUTCOME_OF_STATUS[status]


class OutcomeCount(NamedTuple):
    count: int
    percent: float


def outcome_summary(
    cases: Sequence[InquiryCase], deadline: date | None = None
) -> dict[str, OutcomeCount]:
    """Returns the count and percentage of every outcome at a deadline.

    Percentages are rounded to one decimal.
    """
    counts = Counter(classify_outcome(case, deadline) for case in cases)
    total = len(cases)
    return {
        outcome: OutcomeCount(
            counts[outcome],
            round(100 * counts[outcome] / total, 1) if total > 0 else 0.0,
        )
        for outcome in OUTCOMES
    }


def response_timeline(cases: Iterable[InquiryCase]) -> dict[int, dict[str, int]]:
    """Count the replies per week after sending, by response type.

    Week 1 covers the first seven days after sending. Status notifications of
    ticket systems are not counted.

    Returns:
        Map from week to the count of every response type, for every week from 1
        to the last week with a reply.
    """
    weeks = defaultdict(Counter)
    for case in cases:
        for event in case.events:
            if event.counts_toward_workload:
                week = max((event.date - case.sent_date).days - 1, 0) // 7 + 1
                weeks[week][event.response_type] += 1
    last = max(weeks, default=0)
    return {
        week: {t: weeks[week][t] for t in RESPONSE_TYPES} for week in range(1, last + 1)
    }


class ClusterPoint(NamedTuple):
    """Merged points of one outcome.

    Attributes:
        outcome: Outcome of the merged cases.
        day: Mean response day, counted from the sending date.
        score: Mean workload score.
        size: Number of merged cases.
    """

    outcome: str
    day: float
    score: float
    size: int


def _response_day(case: InquiryCase, limit: int) -> int:
    last = case.events[-1].date
    return min((last - case.sent_date).days, limit)


def cluster_points(
    cases: Sequence[InquiryCase],
    radius: float = 3.0,
    clamp_days: int = 5,
    holidays: Iterable[date] | None = None,
) -> list[ClusterPoint]:
    """Merge the (response day, workload score) points of the cases by outcome.

    The response day of a case is the day of its last reply, counted from the
    sending date and clamped to `clamp_days` days after the business-day
    deadline. Within each outcome, points closer than `radius` in euclidean
    distance are merged by single linkage, and each cluster is placed at the mean
    of its points. Cases without reply are left out.

    Args:
        cases: Inquiry cases.
        radius: Merge distance.
        clamp_days: Days after the second deadline beyond which replies are
            clamped.
        holidays: Holidays of the business-day deadline, see `legal_deadline`.

    Returns:
        Clusters sorted by outcome, day and score.
    """
    holidays = None if holidays is None else list(holidays)
    points = defaultdict(list)
    for case in cases:
        if len(case.events) == 0:
            continue
        deadline = legal_deadline(case.sent_date, 'business', holidays)
        limit = (deadline - case.sent_date).days + clamp_days
        points[case.outcome].append(
            (_response_day(case, limit), workload_score(case.workload))
        )

    clusters = []
    for outcome in sorted(points, key=OUTCOMES.index):
        xy = np.asarray(points[outcome], dtype=np.float64)
        if len(xy) == 1:
            labels = np.ones(1, dtype=int)
        else:
            labels = fcluster(
                linkage(xy, method='single'), t=radius, criterion='distance'
            )
        for label in np.unique(labels):
            members = xy[labels == label]
            mean_day, mean_score = members.mean(axis=0)
            clusters.append(
                ClusterPoint(outcome, float(mean_day), float(mean_score), len(members))
            )
    return sorted(
        clusters, key=lambda c: (OUTCOMES.index(c.outcome), c.day, c.score)
    )


# === input/output


def _case_from_dict(obj: dict[str, Any]) -> InquiryCase:
    events = [
        ResponseEvent(
            date.fromisoformat(e['date']),
            e['response_type'],
            e.get('status', 'in_process'),
            bool(e.get('counts_toward_workload', True)),
        )
        for e in obj.get('events', [])
    ]
    w = obj.get('workload', {})
    workload = WorkloadInputs(
        int(w.get('m_pre', 0)),
        int(w.get('m_post', 0)),
        int(w.get('a_online', 0)),
        int(w.get('a_offline', 0)),
    )
    return InquiryCase(
        obj['company'],
        obj.get('channel', 'email'),
        date.fromisoformat(obj['sent_date']),
        events,
        workload,
    )


def load_cases(data: bytes | str) -> list[InquiryCase]:
    """Load inquiry cases from JSON.

    The input is a list of objects with `company`, `channel`, `sent_date` (ISO
    date), `events` (objects with `date`, `response_type`, `status` and
    `counts_toward_workload`) and `workload` (`m_pre`, `m_post`, `a_online`,
    `a_offline`).

    Examples:
        >>> cases = cs.load_cases(
        ...     '[{"company": "Acme", "sent_date": "2018-06-20",'
        ...     ' "workload": {"m_pre": 2, "m_post": 1, "a_online": 1, "a_offline": 1}}]'
        ... )
        >>> cs.workload_score(cases[0].workload), cases[0].outcome
        (52, 'no_response')
    """  # noqa: E501
    try:
        raw = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ArtifactError(f'Malformed cases JSON: {e}') from e
    if not isinstance(raw, list):
        raise ArtifactError(f'Cases must be a JSON list, but got {obj_type_str(raw)}.')
    cases = []
    for i, obj in enumerate(raw):
        try:
            cases.append(_case_from_dict(obj))
        except (AttributeError, KeyError, TypeError, ValueError) as e:
            raise ArtifactError(f'Malformed case at index {i}: {e}') from e
    logger.info('loaded %d inquiry cases', len(cases))
    return cases


def write_cases_csv(
    cases: Sequence[InquiryCase], deadline: date | None = None
) -> str:
    """Returns one CSV row per case: company, sending date, date of the last
    reply, workload score and outcome at `deadline`.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(('company', 'sent_date', 'date', 'score', 'outcome'))
    for case in cases:
        last = case.events[-1].date.isoformat() if len(case.events) > 0 else ''
        writer.writerow(
            (
                case.company,
                case.sent_date.isoformat(),
                last,
                workload_score(case.workload),
                classify_outcome(case, deadline),
            )
        )
    return buffer.getvalue()
