# Generated by Django 4.2.28 on 2026-10-19 09:12

from django.db import migrations, models
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='RunEntry',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('timestamp', models.DateTimeField(auto_now_add=True, db_index=True)),
                ('command', models.CharField(choices=[('simulate', 'Simulate'), ('figure', 'Figure')], db_index=True, max_length=20)),
                ('schedulers', models.CharField(max_length=200)),
                ('seed', models.PositiveBigIntegerField()),
                ('runs', models.PositiveIntegerField()),
                ('slots', models.PositiveIntegerField()),
                ('out_dir', models.TextField()),
                ('detail', models.TextField(blank=True, default='')),
            ],
            options={
                'db_table': 'run_log',
                'ordering': ['-timestamp'],
                'indexes': [models.Index(fields=['command', 'timestamp'], name='idx_runlog_cmd_ts')],
            },
        ),
    ]
